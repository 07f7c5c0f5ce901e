"""Precision/recall/F1 for aligned pairs, corpus averaging and bootstrap intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .align import Matcher, DEFAULT_MATCHER
from .graph import INSTANCE, Graph


class NonInjectiveMap(ValueError):
    pass


class EmptyCorpus(ValueError):
    pass


class MixedCompression(ValueError):
    pass


@dataclass(frozen=True)
class PairStats:
    matches: float
    size_a: int
    size_b: int
    lower: Optional[float] = None
    upper: Optional[float] = None
    optimal: bool = True
    compressed: bool = False

    @property
    def vacuous(self) -> bool:
        return self.size_a == 0 and self.size_b == 0


@dataclass(frozen=True)
class CorpusScore:
    precision: float
    recall: float
    f1: float
    averaging: str
    n_pairs: int
    ci: Optional[Dict[str, Tuple[float, float]]] = None

    def as_dict(self) -> dict:
        d = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "n_pairs": self.n_pairs,
        }
        if self.ci is not None:
            d["ci"] = {k: [lo, hi] for k, (lo, hi) in self.ci.items()}
        return d


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def prf(matches: float, size_a: float, size_b: float) -> Tuple[float, float, float]:
    if size_a == 0 and size_b == 0:
        return 1.0, 1.0, 1.0
    p = matches / size_a if size_a else 0.0
    r = matches / size_b if size_b else 0.0
    return p, r, f1_score(p, r)


def pair_score(ps: PairStats) -> Tuple[float, float, float]:
    return prf(ps.matches, ps.size_a, ps.size_b)


def count_matches(a: Graph, b: Graph, mapping: Dict[str, str], matcher: Matcher = DEFAULT_MATCHER) -> float:
    """Match value of ``a`` against ``b`` after renaming ``a``'s variables by ``mapping``.

    Unmapped variables match nothing.  Works on the triples directly and
    does not share code with the weight tables used by the solvers.
    """
    if len(set(mapping.values())) != len(mapping):
        raise NonInjectiveMap("two variables of a are mapped to the same variable of b")
    for x, y in mapping.items():
        if x not in a.variables or y not in b.variables:
            raise NonInjectiveMap(f"mapping {x!r}->{y!r} does not connect two variables")

    unmapped = object()

    def endpoint_a(sym):
        if sym in a.variables:
            return ("v", mapping[sym]) if sym in mapping else unmapped
        return ("c", sym)

    def endpoint_b(sym):
        return ("v", sym) if sym in b.variables else ("c", sym)

    total = 0.0
    b_triples = [(endpoint_b(s), r, endpoint_b(t), (s, r, t)) for s, r, t in b.triples]
    for t in a.triples:
        s1, t1 = endpoint_a(t.source), endpoint_a(t.target)
        if s1 is unmapped or t1 is unmapped:
            continue
        for s2, r2, t2, raw in b_triples:
            if r2 != t.relation or s1 != s2:
                continue
            if t.relation == INSTANCE and t1[0] == "c" and t2[0] == "c":
                val = matcher.sim(t1[1], t2[1])
            else:
                val = 1.0 if t1 == t2 else 0.0
            if val:
                total += val * matcher.scale(t, raw)
    return total


def _check(stats: Sequence[PairStats]) -> None:
    if not stats:
        raise EmptyCorpus("no graph pairs to aggregate")
    if len({s.compressed for s in stats}) > 1:
        raise MixedCompression("cannot aggregate compressed and uncompressed pair statistics")


def micro(stats: Sequence[PairStats]) -> CorpusScore:
    _check(stats)
    f = sum(s.matches for s in stats)
    na = sum(s.size_a for s in stats)
    nb = sum(s.size_b for s in stats)
    p, r, f1 = prf(f, na, nb)
    return CorpusScore(p, r, f1, "micro", len(stats))


def macro(stats: Sequence[PairStats], vacuous: bool = True, recompute_f1: bool = False) -> CorpusScore:
    """Mean of per-pair scores.

    ``vacuous=False`` drops both-empty pairs; ``recompute_f1`` takes the
    harmonic mean of macro P and R instead of averaging per-pair F1.
    """
    _check(stats)
    rows = [pair_score(s) for s in stats if vacuous or not s.vacuous]
    if not rows:
        return CorpusScore(1.0, 1.0, 1.0, "macro", len(stats))
    arr = np.array(rows)
    p, r, f1 = arr.mean(axis=0)
    if recompute_f1:
        f1 = f1_score(p, r)
    return CorpusScore(float(p), float(r), float(f1), "macro", len(stats))


def _replicates(stats: Sequence[PairStats], averaging: str, idx: np.ndarray) -> np.ndarray:
    """(B, 3) array of P, R, F1 for each resample of pair indices."""
    if averaging == "micro":
        f = np.array([s.matches for s in stats], dtype=float)[idx].sum(axis=1)
        na = np.array([s.size_a for s in stats], dtype=float)[idx].sum(axis=1)
        nb = np.array([s.size_b for s in stats], dtype=float)[idx].sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(na > 0, f / np.where(na > 0, na, 1), 0.0)
            r = np.where(nb > 0, f / np.where(nb > 0, nb, 1), 0.0)
            f1 = np.where(p + r > 0, 2 * p * r / np.where(p + r > 0, p + r, 1), 0.0)
        both_empty = (na == 0) & (nb == 0)
        p[both_empty] = r[both_empty] = f1[both_empty] = 1.0
        return np.stack([p, r, f1], axis=1)
    if averaging == "macro":
        per = np.array([pair_score(s) for s in stats])
        return per[idx].mean(axis=1)
    raise ValueError(f"unknown averaging {averaging!r}")


def bootstrap_ci(
    stats: Sequence[PairStats],
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    averaging: str = "micro",
) -> Dict[str, Tuple[float, float]]:
    """Percentile bootstrap over graph pairs (resampled after alignment)."""
    _check(stats)
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(stats), size=(n_boot, len(stats)))
    reps = _replicates(stats, averaging, idx)
    alpha = (1 - level) / 2
    lo = np.quantile(reps, alpha, axis=0, method="inverted_cdf")
    hi = np.quantile(reps, 1 - alpha, axis=0, method="inverted_cdf")
    return {
        name: (float(lo[c]), float(hi[c]))
        for c, name in enumerate(("precision", "recall", "f1"))
    }


def aggregate(
    stats: Sequence[PairStats],
    averaging: str = "micro",
    n_boot: Optional[int] = None,
    level: float = 0.95,
    seed: int = 0,
) -> CorpusScore:
    point = micro(stats) if averaging == "micro" else macro(stats)
    if not n_boot:
        return point
    ci = bootstrap_ci(stats, n_boot, level, seed, averaging)
    return CorpusScore(point.precision, point.recall, point.f1, averaging, point.n_pairs, ci)


def bound_gap(stats: Sequence[PairStats]) -> float:
    return float(sum((s.upper if s.upper is not None else s.matches) - (s.lower if s.lower is not None else s.matches) for s in stats))
