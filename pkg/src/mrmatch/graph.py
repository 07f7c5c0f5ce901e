"""Triple-set representation of rooted, labeled meaning-representation graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

INSTANCE = ":instance"


class Triple(NamedTuple):
    source: str
    relation: str
    target: str


@dataclass(frozen=True)
class Graph:
    """A graph is a set of triples plus the set of symbols that are variables.

    Every symbol occurring in a triple that is not in ``variables`` is a
    constant (a concept, an attribute value, or, after compression, a
    concept standing in for a variable).
    """

    triples: frozenset = field(default_factory=frozenset)
    root: Optional[str] = None
    variables: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_triples(
        cls,
        triples: Iterable,
        root: Optional[str] = None,
        variables: Optional[Iterable[str]] = None,
    ) -> "Graph":
        ts = frozenset(Triple(*t) for t in triples)
        if variables is None:
            vs = {t.source for t in ts if t.relation == INSTANCE}
            if root is not None:
                vs.add(root)
        else:
            vs = set(variables)
        if root is None and ts:
            root = min(vs) if vs else None
        return cls(ts, root, frozenset(vs))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(sorted(self.triples))

    def is_variable(self, symbol: str) -> bool:
        return symbol in self.variables

    def used_variables(self) -> set:
        used = set()
        for s, _, t in self.triples:
            if s in self.variables:
                used.add(s)
            if t in self.variables:
                used.add(t)
        return used

    def constants(self) -> set:
        out = set()
        for s, _, t in self.triples:
            if s not in self.variables:
                out.add(s)
            if t not in self.variables:
                out.add(t)
        return out

    def concepts(self, var: str) -> list:
        return sorted(t for s, r, t in self.triples if s == var and r == INSTANCE)

    def replace(self, triples: Iterable, root=..., variables=None) -> "Graph":
        ts = frozenset(Triple(*t) for t in triples)
        vs = self.variables if variables is None else frozenset(variables)
        return Graph(ts, self.root if root is ... else root, vs)

    def rename(self, mapping: dict) -> "Graph":
        """Rename variables; symbols missing from ``mapping`` are kept."""

        def f(x):
            return mapping.get(x, x) if x in self.variables else x

        ts = [(f(s), r, f(t)) for s, r, t in self.triples]
        root = f(self.root) if self.root is not None else None
        return Graph(frozenset(Triple(*t) for t in ts), root, frozenset(f(v) for v in self.variables))


EMPTY = Graph()
