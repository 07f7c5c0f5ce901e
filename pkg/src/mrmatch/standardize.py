"""Graph standardization: lower-casing, de-inversion, (de-)reification and
duplicate removal."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

from .graph import INSTANCE, Graph, Triple

_CORE_RE = re.compile(r"^:(arg|op|snt)\d+$")


def is_core(relation: str) -> bool:
    return bool(_CORE_RE.match(relation))


class RuleTableInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ReifyRule:
    relation: str
    concept: str
    source_role: str
    target_role: str


class ReifyMode(str, enum.Enum):
    NONE = "none"
    REIFY_ALL = "reify"
    DEREIFY = "dereify"


def validate_rules(rules: Sequence[ReifyRule]) -> None:
    seen_rel, seen_concept = set(), set()
    for rule in rules:
        if is_core(rule.relation):
            raise RuleTableInvalid(f"{rule.relation} is a core relation and cannot be reified")
        if not (is_core(rule.source_role) and is_core(rule.target_role)):
            raise RuleTableInvalid(f"roles of {rule.relation} must be core relations")
        if rule.source_role == rule.target_role:
            raise RuleTableInvalid(f"{rule.relation}: source and target role are identical")
        if rule.relation in seen_rel:
            raise RuleTableInvalid(f"duplicate rule for {rule.relation}")
        if rule.concept in seen_concept:
            raise RuleTableInvalid(f"concept {rule.concept} used by two rules")
        seen_rel.add(rule.relation)
        seen_concept.add(rule.concept)


def parse_rules(text: str) -> Tuple[ReifyRule, ...]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise RuleTableInvalid(f"line {lineno}: expected 4 tab-separated columns, got {len(cols)}")
        rules.append(ReifyRule(*(c.strip() for c in cols)))
    validate_rules(rules)
    return tuple(rules)


def load_rules(path: Union[str, Path, None] = None) -> Tuple[ReifyRule, ...]:
    """Load a rule table; ``None`` gives the bundled default table."""
    if path is None:
        text = resources.files("mrmatch.data").joinpath("reify_rules.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_rules(text)


DEFAULT_RULES = load_rules()


@dataclass(frozen=True)
class StandardizeConfig:
    lowercase: bool = True
    deinvert: bool = True
    dedupe: bool = True
    reify_mode: ReifyMode = ReifyMode.DEREIFY
    deinvert_exceptions: frozenset = frozenset({":consist-of"})
    rule_table: Tuple[ReifyRule, ...] = field(default=DEFAULT_RULES)


RAW = StandardizeConfig(lowercase=False, deinvert=False, dedupe=False, reify_mode=ReifyMode.NONE)


def lowercase(g: Graph) -> Graph:
    triples = {Triple(s.lower(), r.lower(), t.lower()) for s, r, t in g.triples}
    root = g.root.lower() if g.root is not None else None
    return Graph(frozenset(triples), root, frozenset(v.lower() for v in g.variables))


def deinvert(g: Graph, exceptions: Iterable[str] = frozenset({":consist-of"})) -> Graph:
    exceptions = set(exceptions)
    out = set()
    for s, r, t in g.triples:
        if (
            r.endswith("-of")
            and len(r) > 4
            and r not in exceptions
            and t in g.variables
        ):
            out.add(Triple(t, r[:-3], s))
        else:
            out.add(Triple(s, r, t))
    return g.replace(out)


def dedupe(g: Graph) -> Graph:
    # triples are a set already; distinct concepts for one variable are all kept
    return g.replace(set(g.triples))


def _fresh_names(g: Graph, prefix: str = "rfy"):
    taken = set(g.variables) | g.constants()
    n = 0
    while True:
        name = f"{prefix}{n}"
        n += 1
        if name not in taken:
            yield name


def reify(g: Graph, table: Sequence[ReifyRule] = DEFAULT_RULES) -> Graph:
    validate_rules(table)
    by_rel = {r.relation: r for r in table}
    fresh = _fresh_names(g)
    out = set()
    new_vars = set(g.variables)
    for t in sorted(g.triples):
        rule = by_rel.get(t.relation)
        if rule is None:
            out.add(t)
            continue
        z = next(fresh)
        new_vars.add(z)
        out.add(Triple(z, INSTANCE, rule.concept))
        out.add(Triple(z, rule.source_role, t.source))
        out.add(Triple(z, rule.target_role, t.target))
    return g.replace(out, variables=new_vars)


def _collapsible(g: Graph, z: str, by_concept: dict, outgoing: dict, has_incoming: set):
    if z == g.root or z in has_incoming:
        return None
    out = outgoing.get(z, ())
    if len(out) != 3:
        return None
    concepts = [t.target for t in out if t.relation == INSTANCE]
    if len(concepts) != 1:
        return None
    rule = by_concept.get(concepts[0])
    if rule is None:
        return None
    src = [t.target for t in out if t.relation == rule.source_role]
    tgt = [t.target for t in out if t.relation == rule.target_role]
    if len(src) != 1 or len(tgt) != 1:
        return None
    x, y = src[0], tgt[0]
    if x not in g.variables or x == z or y == z:
        return None
    return Triple(x, rule.relation, y)


def dereify(g: Graph, table: Sequence[ReifyRule] = DEFAULT_RULES) -> Graph:
    """Collapse reified nodes back into single edges wherever that is well defined."""
    validate_rules(table)
    by_concept = {r.concept: r for r in table}
    while True:
        outgoing: dict = {}
        has_incoming = set()
        for t in g.triples:
            outgoing.setdefault(t.source, []).append(t)
            if t.relation != INSTANCE and t.target in g.variables:
                has_incoming.add(t.target)
        for z in sorted(g.variables):
            edge = _collapsible(g, z, by_concept, outgoing, has_incoming)
            if edge is not None:
                break
        else:
            return g
        triples = set(g.triples) - set(outgoing[z])
        triples.add(edge)
        g = g.replace(triples, variables=g.variables - {z})


def standardize(g: Graph, cfg: Optional[StandardizeConfig] = None) -> Graph:
    cfg = cfg or StandardizeConfig()
    if cfg.lowercase:
        g = lowercase(g)
    if cfg.deinvert:
        g = deinvert(g, cfg.deinvert_exceptions)
    if cfg.reify_mode == ReifyMode.REIFY_ALL:
        g = reify(g, cfg.rule_table)
    elif cfg.reify_mode == ReifyMode.DEREIFY:
        g = dereify(g, cfg.rule_table)
    if cfg.dedupe:
        g = dedupe(g)
    return g
