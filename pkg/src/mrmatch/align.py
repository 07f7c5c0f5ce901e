"""Variable alignment between two graphs.

The objective for an alignment ``x`` (a partial one-to-one map from the
variables of ``a`` to those of ``b``) is::

    const + sum u[i, j] x[i, j] + sum b[i, j, k, l] x[i, j] x[k, l]

``u`` counts matches of triples touching one variable, ``b`` matches of
triples linking two variables, and ``const`` matches of variable-free
triples (these appear after compression).  Three solvers share the
:class:`MatchWeights` tables: a greedy hill-climber with restarts, an exact
branch-and-bound with a linear-assignment upper bound, and a brute-force
enumerator used as a test oracle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import INSTANCE, Graph, Triple

EPS = 1e-9


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Matcher:
    """Scaled triple match.

    ``weight(t, t2)`` scales every match (default 1); ``concept_sim(c, c2)``
    grades instance-triple matches (default exact equality).
    """

    weight: Optional[Callable[[Triple, Triple], float]] = None
    concept_sim: Optional[Callable[[str, str], float]] = None

    @property
    def is_default(self) -> bool:
        return self.weight is None and self.concept_sim is None

    def sim(self, c1: str, c2: str) -> float:
        if self.concept_sim is None:
            return 1.0 if c1 == c2 else 0.0
        return float(self.concept_sim(c1, c2))

    def scale(self, t1: Triple, t2: Triple) -> float:
        return 1.0 if self.weight is None else float(self.weight(t1, t2))


DEFAULT_MATCHER = Matcher()


@dataclass
class MatchWeights:
    vars_a: List[str]
    vars_b: List[str]
    u: np.ndarray
    b: Dict[Tuple[int, int, int, int], float]
    const: float
    size_a: int
    size_b: int
    trivial_upper: float
    integral: bool = True
    _links: Optional[dict] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.vars_a)

    @property
    def m(self) -> int:
        return len(self.vars_b)

    def links(self) -> dict:
        """(i, j) -> list of (k, l, b[i,j,k,l] + b[k,l,i,j])."""
        if self._links is None:
            combined: Dict[Tuple[int, int, int, int], float] = {}
            for (i, j, k, l), val in self.b.items():
                combined[(i, j, k, l)] = combined.get((i, j, k, l), 0.0) + val
                combined[(k, l, i, j)] = combined.get((k, l, i, j), 0.0) + val
            links: dict = {}
            for (i, j, k, l), val in sorted(combined.items()):
                links.setdefault((i, j), []).append((k, l, val))
            self._links = links
        return self._links

    def objective(self, assignment) -> float:
        """Objective of ``assignment`` (sequence over a-variables; -1 = unaligned)."""
        total = self.const
        for i, j in enumerate(assignment):
            if j >= 0:
                total += self.u[i, j]
        for (i, j, k, l), val in self.b.items():
            if assignment[i] == j and assignment[k] == l:
                total += val
        return float(total)

    def to_map(self, assignment) -> Dict[str, str]:
        return {self.vars_a[i]: self.vars_b[j] for i, j in enumerate(assignment) if j >= 0}

    def from_map(self, mapping: Dict[str, str]) -> List[int]:
        ib = {v: j for j, v in enumerate(self.vars_b)}
        return [ib[mapping[v]] if v in mapping else -1 for v in self.vars_a]


@dataclass
class AlignmentSolution:
    map: Dict[str, str]
    lower: float
    upper: float
    optimal: bool
    work: int = 0
    elapsed: float = 0.0
    solver: str = ""
    history: List[float] = field(default_factory=list)


def compute_match_weights(a: Graph, b: Graph, matcher: Matcher = DEFAULT_MATCHER) -> MatchWeights:
    va = sorted(a.used_variables())
    vb = sorted(b.used_variables())
    ia = {v: i for i, v in enumerate(va)}
    ib = {v: j for j, v in enumerate(vb)}
    u = np.zeros((len(va), len(vb)))
    bw: Dict[Tuple[int, int, int, int], float] = {}
    const = 0.0

    by_rel: dict = {}
    for t in b.triples:
        by_rel.setdefault(t.relation, []).append(t)

    for t in sorted(a.triples):
        s_var, t_var = t.source in a.variables, t.target in a.variables
        for t2 in by_rel.get(t.relation, ()):
            if (s_var, t_var) != (t2.source in b.variables, t2.target in b.variables):
                continue
            if not s_var and t.source != t2.source:
                continue
            if not t_var:
                if t.relation == INSTANCE:
                    val = matcher.sim(t.target, t2.target)
                else:
                    val = 1.0 if t.target == t2.target else 0.0
            else:
                val = 1.0
            if val == 0.0:
                continue
            val *= matcher.scale(t, t2)
            if val == 0.0:
                continue
            if s_var and t_var:
                i, k = ia[t.source], ia[t.target]
                j, l = ib[t2.source], ib[t2.target]
                if i == k and j == l:
                    u[i, j] += val
                elif i != k and j != l:
                    bw[(i, j, k, l)] = bw.get((i, j, k, l), 0.0) + val
            elif s_var:
                u[ia[t.source], ib[t2.source]] += val
            elif t_var:
                u[ia[t.target], ib[t2.target]] += val
            else:
                const += val

    integral = bool(
        np.all(u == np.round(u))
        and all(v == round(v) for v in bw.values())
        and const == round(const)
    )
    if matcher.is_default:
        trivial = float(min(len(a), len(b)))
    else:
        trivial = const + float(u.sum()) + float(sum(bw.values()))
    return MatchWeights(va, vb, u, bw, const, len(a), len(b), trivial, integral)


def alignment_candidates(n: int, m: int) -> int:
    """Number of maximal alignments: every variable of the smaller side aligned."""
    lo, hi = min(n, m), max(n, m)
    return math.perm(hi, lo)


def partial_map_count(n: int, m: int) -> int:
    return sum(math.comb(n, k) * math.comb(m, k) * math.factorial(k) for k in range(min(n, m) + 1))


# -- hill-climbing -----------------------------------------------------------


class _Climber:
    def __init__(self, w: MatchWeights):
        self.w = w
        self.n, self.m = w.n, w.m
        self.u = w.u.tolist()
        self.links = w.links()
        self.pair = {}
        for (i, j), lst in self.links.items():
            for k, l, val in lst:
                self.pair[(i, j, k, l)] = val

    def gain(self, cur, i, j, skip=-1):
        if j < 0:
            return 0.0
        g = self.u[i][j]
        for k, l, val in self.links.get((i, j), ()):
            if k != skip and cur[k] == l:
                g += val
        return g

    def climb(self, cur: List[int]) -> Tuple[List[int], List[float], int]:
        n, m = self.n, self.m
        owner = [-1] * m
        for i, j in enumerate(cur):
            if j >= 0:
                owner[j] = i
        value = self.w.objective(cur)
        history = [value]
        steps = 0
        while True:
            best, move = EPS, None
            for i in range(n):
                j = cur[i]
                for j2 in range(m):
                    if j2 == j:
                        continue
                    k = owner[j2]
                    if k < 0:
                        delta = self.gain(cur, i, j2) - self.gain(cur, i, j)
                    else:
                        # switch: i takes j2, k takes j (possibly nothing)
                        delta = (
                            self.gain(cur, i, j2, k)
                            + self.gain(cur, k, j, i)
                            + (self.pair.get((i, j2, k, j), 0.0) if j >= 0 else 0.0)
                            - self.gain(cur, i, j, k)
                            - self.gain(cur, k, j2, i)
                            - (self.pair.get((i, j, k, j2), 0.0) if j >= 0 else 0.0)
                        )
                    if delta > best:
                        best, move = delta, (i, j2, k)
            if move is None:
                return cur, history, steps
            i, j2, k = move
            j = cur[i]
            cur[i] = j2
            owner[j2] = i
            if k >= 0:
                cur[k] = j
                if j >= 0:
                    owner[j] = k
            elif j >= 0:
                owner[j] = -1
            steps += 1
            value = self.w.objective(cur)
            history.append(value)


def concept_init(w: MatchWeights) -> List[int]:
    """Greedy start: each a-variable takes the free b-variable with the best unary match."""
    cur = [-1] * w.n
    used = set()
    for i in range(w.n):
        best, bj = 0.0, -1
        for j in range(w.m):
            if j not in used and w.u[i, j] > best + EPS:
                best, bj = w.u[i, j], j
        if bj >= 0:
            cur[i] = bj
            used.add(bj)
    return cur


def random_init(w: MatchWeights, rng: np.random.Generator) -> List[int]:
    cur = [-1] * w.n
    pi = rng.permutation(w.n)
    pj = rng.permutation(w.m)
    for t in range(min(w.n, w.m)):
        cur[int(pi[t])] = int(pj[t])
    return cur


def _finish(w, cur, history, work, start, solver, upper=None, optimal=None):
    lower = w.objective(cur)
    if upper is None:
        upper = max(w.trivial_upper, lower)
    if optimal is None:
        optimal = lower >= upper - EPS
    return AlignmentSolution(
        map=w.to_map(cur),
        lower=lower,
        upper=upper,
        optimal=bool(optimal),
        work=work,
        elapsed=time.perf_counter() - start,
        solver=solver,
        history=history,
    )


def hill_climb(w: MatchWeights, restarts: int = 4, seed: int = 0) -> AlignmentSolution:
    """Greedy ascent over assign/switch moves; first restart starts from concept matches."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    start = time.perf_counter()
    climber = _Climber(w)
    best = None
    work = 0
    for r in range(restarts):
        init = concept_init(w) if r == 0 else random_init(w, np.random.default_rng([seed, r]))
        cur, history, steps = climber.climb(init)
        work += steps + 1
        if best is None or history[-1] > best[1][-1] + EPS:
            best = (cur, history)
        if best[1][-1] >= w.trivial_upper - EPS:
            break
    return _finish(w, best[0], best[1], work, start, "hillclimb")


def profile_local_optima(w: MatchWeights, tries: int = 20, seed: int = 0) -> List[float]:
    """Terminal objective values of ``tries`` independently seeded single climbs."""
    if tries < 1:
        raise ValueError("tries must be >= 1")
    climber = _Climber(w)
    values = []
    for r in range(tries):
        cur, history, _ = climber.climb(random_init(w, np.random.default_rng([seed, r])))
        values.append(history[-1])
    return values


# -- exact branch and bound --------------------------------------------------


class _BranchAndBound:
    def __init__(self, w: MatchWeights):
        self.w = w
        self.n, self.m = w.n, w.m
        self.u = w.u
        self.links = w.links()

    def bound(self, cur):
        """Value of the fixed part and an assignment-relaxation bound for the rest.

        A link between two undecided variables is split evenly between both
        endpoints, and each endpoint optimistically takes its best partner.
        """
        n, m = self.n, self.m
        fixed = self.w.const
        rows = [i for i in range(n) if cur[i] == -2]
        used = {j for j in cur if j >= 0}
        cols = [j for j in range(m) if j not in used]
        for i in range(n):
            j = cur[i]
            if j >= 0:
                fixed += self.u[i, j]
                for k, l, val in self.links.get((i, j), ()):
                    if k < i and cur[k] == l:
                        fixed += val
        if not rows or not cols:
            return fixed, 0.0, rows, cols, None
        col_pos = {j: c for c, j in enumerate(cols)}
        h = np.zeros((len(rows), len(cols)))
        for r, i in enumerate(rows):
            for c, j in enumerate(cols):
                val = self.u[i, j]
                best: dict = {}
                for k, l, lv in self.links.get((i, j), ()):
                    ck = cur[k]
                    if ck >= 0:
                        if ck == l:
                            val += lv
                    elif ck == -2 and l != j and l in col_pos:
                        if lv > best.get(k, 0.0):
                            best[k] = lv
                h[r, c] = val + 0.5 * sum(best.values())
        ri, ci = linear_sum_assignment(h, maximize=True)
        return fixed, float(h[ri, ci].sum()), rows, cols, (h, ri, ci)

    def solve(self, timeout: float, incumbent: List[int]):
        w = self.w
        deadline = time.perf_counter() + timeout
        best_cur = list(incumbent)
        best_val = w.objective(best_cur)

        def prunable(bound):
            if math.isinf(bound):
                return False
            if w.integral:
                return math.floor(bound + 1e-6) <= best_val + EPS
            return bound <= best_val + EPS

        stack = [(math.inf, tuple([-2] * self.n))]
        nodes = 0
        timed_out = False
        while stack:
            if time.perf_counter() > deadline:
                timed_out = True
                break
            parent_bound, cur = stack.pop()
            if prunable(parent_bound):
                continue
            nodes += 1
            fixed, relax, rows, cols, lap = self.bound(cur)
            bound = fixed + relax
            if lap is not None:
                h, ri, ci = lap
                cand = [j if j >= 0 else -1 for j in cur]
                for r, c in zip(ri, ci):
                    if h[r, c] > 0:
                        cand[rows[r]] = cols[c]
                val = w.objective(cand)
                if val > best_val + EPS:
                    best_val, best_cur = val, cand
            else:
                cand = [j if j >= 0 else -1 for j in cur]
                val = w.objective(cand)
                if val > best_val + EPS:
                    best_val, best_cur = val, cand
                continue
            if prunable(bound):
                continue
            h, ri, ci = lap
            # branch on the undecided variable with the largest optimistic value
            r = int(np.argmax(h.max(axis=1)))
            i = rows[r]
            order = sorted(range(len(cols)), key=lambda c: (-h[r, c], cols[c]))
            children = []
            for c in order:
                nxt = list(cur)
                nxt[i] = cols[c]
                children.append((bound, tuple(nxt)))
            nxt = list(cur)
            nxt[i] = -1
            children.append((bound, tuple(nxt)))
            stack.extend(reversed(children))
        if timed_out:
            open_bound = max((b for b, _ in stack), default=best_val)
            upper = max(best_val, min(open_bound, w.trivial_upper))
            if w.integral:
                upper = max(best_val, float(math.floor(upper + 1e-6)))
        else:
            upper = best_val
        return best_cur, upper, nodes, timed_out


def solve_exact(w: MatchWeights, timeout: float = 240.0) -> AlignmentSolution:
    """Optimal alignment with a certificate; on timeout, best map plus a valid upper bound."""
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    start = time.perf_counter()
    if w.n == 0 or w.m == 0:
        return _finish(w, [-1] * w.n, [w.const], 0, start, "exact", upper=w.const, optimal=True)
    climber = _Climber(w)
    init, _, _ = climber.climb(concept_init(w))
    remaining = max(timeout - (time.perf_counter() - start), 1e-3)
    cur, upper, nodes, timed_out = _BranchAndBound(w).solve(remaining, init)
    sol = _finish(w, cur, [], nodes, start, "exact", upper=upper, optimal=not timed_out)
    if timed_out and sol.lower >= upper - EPS:
        sol.optimal = True
    return sol


# -- brute force oracle ------------------------------------------------------


@lru_cache(maxsize=64)
def _enumerate_maps(n: int, m: int) -> np.ndarray:
    maps = np.zeros((1, 0), dtype=np.int16)
    for _ in range(n):
        parts = [np.hstack([maps, np.full((len(maps), 1), -1, dtype=np.int16)])]
        for j in range(m):
            keep = maps[~(maps == j).any(axis=1)]
            parts.append(np.hstack([keep, np.full((len(keep), 1), j, dtype=np.int16)]))
        maps = np.concatenate(parts)
    maps.setflags(write=False)
    return maps


def brute_force(w: MatchWeights, cap: int = 8) -> AlignmentSolution:
    """Exhaustive optimum over every partial one-to-one map."""
    start = time.perf_counter()
    n, m = w.n, w.m
    if min(n, m) > cap or partial_map_count(n, m) > partial_map_count(cap, cap):
        raise TooLarge(f"{n}x{m} variables exceed the brute-force cap of {cap}")
    maps = _enumerate_maps(n, m)
    vals = np.full(len(maps), w.const)
    if n and m:
        upad = np.hstack([w.u, np.zeros((n, 1))])
        for i in range(n):
            vals += upad[i, maps[:, i]]
        for (i, j, k, l), val in w.b.items():
            vals += val * ((maps[:, i] == j) & (maps[:, k] == l))
    best = int(np.argmax(vals))
    cur = [int(x) for x in maps[best]]
    lower = w.objective(cur)
    return _finish(w, cur, [], len(maps), start, "brute", upper=lower, optimal=True)


SOLVERS = ("exact", "hillclimb", "brute")


def solve(
    w: MatchWeights,
    solver: str = "exact",
    *,
    restarts: int = 4,
    seed: int = 0,
    timeout: float = 240.0,
    cap: int = 8,
) -> AlignmentSolution:
    if solver == "exact":
        return solve_exact(w, timeout)
    if solver == "hillclimb":
        return hill_climb(w, restarts, seed)
    if solver == "brute":
        return brute_force(w, cap)
    raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
