"""Lossless compression of a graph pair.

A variable whose concept is carried by no other variable (in its own graph,
and by at most one variable in the partner graph) is replaced by that
concept.  Both graphs shrink, and so does the alignment search space.  The
returned record restores the originals exactly.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Tuple

from .graph import INSTANCE, Graph, Triple


class CollisionUnresolvable(RuntimeError):
    pass


class RecordMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CompressionRecord:
    # side -> {variable: (substitute symbol, concept)}
    a: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    b: Dict[str, Tuple[str, str]] = field(default_factory=dict)

    def side(self, side: str) -> Dict[str, Tuple[str, str]]:
        if side in ("a", "A"):
            return self.a
        if side in ("b", "B"):
            return self.b
        raise ValueError(f"side must be 'a' or 'b', got {side!r}")

    def __bool__(self) -> bool:
        return bool(self.a or self.b)


def _eligible(g: Graph) -> Dict[str, list]:
    """concept -> variables carrying it, and per-variable eligibility."""
    by_concept = defaultdict(list)
    n_concepts = defaultdict(int)
    mentions = defaultdict(int)
    for s, r, t in g.triples:
        if r == INSTANCE and s in g.variables:
            by_concept[t].append(s)
            n_concepts[s] += 1
        else:
            if s in g.variables:
                mentions[s] += 1
            if t in g.variables:
                mentions[t] += 1
    ok = {v for v in g.variables if n_concepts[v] == 1 and mentions[v] > 0}
    return by_concept, ok


def compress_pair(a: Graph, b: Graph):
    """Return ``(a', b', record)``."""
    conc_a, ok_a = _eligible(a)
    conc_b, ok_b = _eligible(b)

    chosen = {}  # concept -> (var in a or None, var in b or None)
    for c in sorted(set(conc_a) | set(conc_b)):
        va, vb = conc_a.get(c, []), conc_b.get(c, [])
        if len(va) > 1 or len(vb) > 1:
            continue
        if any(v not in ok_a for v in va) or any(v not in ok_b for v in vb):
            continue
        chosen[c] = (va[0] if va else None, vb[0] if vb else None)

    dropped = set()
    for c, (xa, xb) in chosen.items():
        if xa is not None:
            dropped.add(("a", Triple(xa, INSTANCE, c)))
        if xb is not None:
            dropped.add(("b", Triple(xb, INSTANCE, c)))

    taken = set(a.variables) | set(b.variables)
    for side, g in (("a", a), ("b", b)):
        for t in g.triples:
            if (side, t) in dropped:
                continue
            if t.source not in g.variables:
                taken.add(t.source)
            if t.target not in g.variables:
                taken.add(t.target)

    rec_a, rec_b = {}, {}
    for c, (xa, xb) in chosen.items():
        sym = c
        n = 0
        while sym in taken:
            n += 1
            if n > 100000:
                raise CollisionUnresolvable(f"no free substitute symbol for concept {c!r}")
            sym = f"{c}_cmpr{n}"
        taken.add(sym)
        if xa is not None:
            rec_a[xa] = (sym, c)
        if xb is not None:
            rec_b[xb] = (sym, c)

    rec = CompressionRecord(rec_a, rec_b)
    return _apply(a, rec_a), _apply(b, rec_b), rec


def _apply(g: Graph, subs: Dict[str, Tuple[str, str]]) -> Graph:
    if not subs:
        return g
    out = set()
    for s, r, t in g.triples:
        if r == INSTANCE and s in subs and subs[s][1] == t:
            continue
        out.add(Triple(subs[s][0] if s in subs else s, r, subs[t][0] if t in subs else t))
    root = subs[g.root][0] if g.root in subs else g.root
    return Graph(frozenset(out), root, g.variables - set(subs))


def decompress(g: Graph, rec: CompressionRecord, side: str) -> Graph:
    subs = rec.side(side)
    if not subs:
        return g
    back = {sym: var for var, (sym, _) in subs.items()}
    clash = sorted(set(subs) & g.variables)
    if clash:
        raise RecordMismatch(f"substituted variables still present in graph: {clash}")
    present = {g.root} if g.root is not None else set()
    for s, r, t in g.triples:
        present.add(s)
        if r != INSTANCE:
            present.add(t)
    missing = sorted(set(back) - present)
    if missing:
        raise RecordMismatch(f"substituted symbols not found in graph: {missing}")
    out = set()
    for s, r, t in g.triples:
        s = back.get(s, s) if s not in g.variables else s
        t = back.get(t, t) if t not in g.variables else t
        out.add(Triple(s, r, t))
    for var, (_, concept) in subs.items():
        out.add(Triple(var, INSTANCE, concept))
    root = back.get(g.root, g.root) if g.root not in g.variables else g.root
    return Graph(frozenset(out), root, g.variables | set(subs))


def lift_alignment(map_c: dict, rec: CompressionRecord) -> dict:
    """Translate an alignment of compressed graphs back to original variables.

    Variables substituted by the same symbol on both sides are aligned to
    each other; a symbol present on one side only leaves its variable
    unaligned.
    """
    lifted = dict(map_c)
    by_sym_b = {sym: var for var, (sym, _) in rec.b.items()}
    for var_a, (sym, _) in sorted(rec.a.items()):
        if sym in by_sym_b:
            lifted[var_a] = by_sym_b[sym]
    return lifted
