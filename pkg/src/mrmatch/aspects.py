"""Aspect-focused sub-graph extraction and scoring.

Every aspect, including the ones that only collect labels, is turned into a
graph and scored under alignment, so one code path serves all of them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from .align import DEFAULT_MATCHER, Matcher
from .graph import INSTANCE, Graph, Triple
from .pipeline import match_pair
from .score import PairStats
from .standardize import DEFAULT_RULES, ReifyRule

TRIGGERS = ("edge", "concept", "reentrancy", "instances", "triples")
RANGES = ("descendants", "triple+instances", "labels", "senseless-labels")
HEAD_ROLE = ":arg1"

_SENSE_RE = re.compile(r"-\d\d+$")


class UnknownAspect(KeyError):
    pass


class UnknownVariable(KeyError):
    pass


@dataclass(frozen=True)
class AspectSpec:
    name: str
    trigger: str
    value: str = ""
    range: str = "descendants"

    def __post_init__(self):
        if self.trigger not in TRIGGERS:
            raise ValueError(f"unknown trigger kind {self.trigger!r}")
        if self.range not in RANGES:
            raise ValueError(f"unknown range {self.range!r}")

    def matches(self, label: str) -> bool:
        return re.fullmatch(self.value, label) is not None


FRAME_PATTERN = r".+-\d\d+"

REGISTRY: Dict[str, AspectSpec] = {
    s.name: s
    for s in [
        AspectSpec("srl", "edge", r":arg\d+", "triple+instances"),
        AspectSpec("reentrancy", "reentrancy", "", "triple+instances"),
        AspectSpec("concepts", "instances", "", "labels"),
        AspectSpec("frames", "concept", FRAME_PATTERN, "labels"),
        AspectSpec("nonsense-frames", "concept", FRAME_PATTERN, "senseless-labels"),
        AspectSpec("ne", "edge", ":name", "descendants"),
        AspectSpec("negation", "edge", ":polarity", "descendants"),
        AspectSpec("wiki", "edge", ":wiki", "descendants"),
        AspectSpec("ignore-vars", "triples", "", "labels"),
        AspectSpec("cause", "concept", "cause-01", "descendants"),
        AspectSpec("tense", "edge", ":time", "descendants"),
        AspectSpec("location", "edge", ":location", "descendants"),
        AspectSpec("quant", "edge", ":quant", "descendants"),
    ]
}


def get_aspect(name: str, registry: Optional[Dict[str, AspectSpec]] = None) -> AspectSpec:
    reg = REGISTRY if registry is None else registry
    try:
        return reg[name]
    except KeyError:
        raise UnknownAspect(f"unknown aspect {name!r}; known: {', '.join(sorted(reg))}") from None


def legacy(spec: AspectSpec) -> AspectSpec:
    """Label-only variant: the concepts of the trigger nodes, as a bag."""
    return AspectSpec(spec.name + "-legacy", spec.trigger, spec.value, "labels")


def load_registry(path: Union[str, Path], base: Optional[Dict[str, AspectSpec]] = None) -> Dict[str, AspectSpec]:
    """Extend ``base`` (default: built-ins) with ``name<TAB>trigger<TAB>value<TAB>range`` rows."""
    reg = dict(REGISTRY if base is None else base)
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 tab-separated columns")
        spec = AspectSpec(cols[0].strip(), cols[1].strip(), cols[2].strip(), cols[3].strip())
        reg[spec.name] = spec
    return reg


def descendant_subgraph(g: Graph, start: str) -> Graph:
    """All triples reachable from ``start`` by following outgoing edges."""
    if start not in g.variables:
        raise UnknownVariable(start)
    out: dict = {}
    for t in g.triples:
        out.setdefault(t.source, []).append(t)
    seen = {start}
    queue = [start]
    triples = set()
    while queue:
        v = queue.pop()
        for t in out.get(v, ()):
            triples.add(t)
            if t.relation != INSTANCE and t.target in g.variables and t.target not in seen:
                seen.add(t.target)
                queue.append(t.target)
    return Graph(frozenset(triples), start, frozenset(seen))


def _instances(g: Graph, v: str) -> set:
    if v not in g.variables:
        return set()
    return {t for t in g.triples if t.source == v and t.relation == INSTANCE}


def _label_graph(labels: Iterable[str]) -> Graph:
    triples = [Triple(f"l{k}", INSTANCE, lab) for k, lab in enumerate(sorted(labels))]
    if not triples:
        return Graph()
    return Graph(frozenset(triples), "l0", frozenset(t.source for t in triples))


def _subgraph(g: Graph, triples: set, root: Optional[str]) -> Graph:
    if not triples:
        return Graph()
    used = set()
    for s, _, t in triples:
        if s in g.variables:
            used.add(s)
        if t in g.variables:
            used.add(t)
    return Graph(frozenset(triples), root, frozenset(used))


def _concept_of(g: Graph, v: str) -> str:
    cs = g.concepts(v)
    return cs[0] if cs else v


def extract_aspect(g: Graph, spec: AspectSpec, rules: Sequence[ReifyRule] = DEFAULT_RULES) -> Graph:
    """Aspect-focused sub-graph of ``g``; empty if the aspect does not occur."""
    triples = sorted(g.triples)
    edges = [t for t in triples if t.relation != INSTANCE]

    if spec.range in ("labels", "senseless-labels"):
        labels: List[str] = []
        if spec.trigger == "instances":
            labels = [t.target for t in triples if t.relation == INSTANCE]
        elif spec.trigger == "concept":
            labels = [t.target for t in triples if t.relation == INSTANCE and spec.matches(t.target)]
        elif spec.trigger == "edge":
            heads = sorted({t.source for t in edges if spec.matches(t.relation)})
            labels = [c for v in heads for c in g.concepts(v)]
        elif spec.trigger == "reentrancy":
            labels = [c for v in _reentrant(g) for c in g.concepts(v)]
        elif spec.trigger == "triples":
            def name(x):
                return _concept_of(g, x) if x in g.variables else x

            labels = [f"{name(s)} {r} {name(t)}" for s, r, t in triples]
        if spec.range == "senseless-labels":
            labels = [_SENSE_RE.sub("", lab) for lab in labels]
        return _label_graph(labels)

    out: set = set()
    root = None
    if spec.trigger == "edge":
        for t in edges:
            if not spec.matches(t.relation):
                continue
            root = root or t.source
            out |= _instances(g, t.source)
            out.add(t)
            if spec.range == "descendants" and t.target in g.variables:
                out |= descendant_subgraph(g, t.target).triples
            elif spec.range == "triple+instances":
                out |= _instances(g, t.target)
    elif spec.trigger == "concept":
        nodes = sorted({t.source for t in triples if t.relation == INSTANCE and spec.matches(t.target)})
        for z in nodes:
            root = root or z
            out |= _instances(g, z)
            for t in edges:
                if t.source != z:
                    continue
                out.add(t)
                if t.relation == HEAD_ROLE or spec.range == "triple+instances":
                    out |= _instances(g, t.target)
                elif t.target in g.variables:
                    out |= descendant_subgraph(g, t.target).triples
        # the same meaning in its collapsed edge form
        collapsed = {r.relation for r in rules if spec.matches(r.concept)}
        for t in edges:
            if t.relation in collapsed:
                root = root or t.source
                out |= _instances(g, t.source)
                out.add(t)
                if spec.range == "descendants" and t.target in g.variables:
                    out |= descendant_subgraph(g, t.target).triples
                else:
                    out |= _instances(g, t.target)
    elif spec.trigger == "reentrancy":
        targets = set(_reentrant(g))
        for t in edges:
            if t.target in targets:
                root = root or t.source
                out.add(t)
                out |= _instances(g, t.source) | _instances(g, t.target)
    elif spec.trigger in ("instances", "triples"):
        out = set(triples)
        root = g.root
    return _subgraph(g, out, root)


def _reentrant(g: Graph) -> List[str]:
    """Variables with at least two incoming edges (distinct source or relation)."""
    incoming: dict = {}
    for s, r, t in g.triples:
        if r != INSTANCE and t in g.variables:
            incoming.setdefault(t, set()).add((s, r))
    return sorted(v for v, e in incoming.items() if len(e) >= 2)


def score_aspect(
    a: Graph,
    b: Graph,
    spec: AspectSpec,
    solver: str = "exact",
    matcher: Matcher = DEFAULT_MATCHER,
    *,
    compress: bool = True,
    rules: Sequence[ReifyRule] = DEFAULT_RULES,
    **solver_kw,
) -> PairStats:
    sa = extract_aspect(a, spec, rules)
    sb = extract_aspect(b, spec, rules)
    if not sa.triples and not sb.triples:
        return PairStats(0.0, 0, 0, 0.0, 0.0, True, compress)
    return match_pair(sa, sb, solver, compress=compress, matcher=matcher, **solver_kw).stats
