"""Reading and writing graphs in Penman notation.

A bare token is a variable iff it is introduced by a ``(token ...)`` group
somewhere in the same graph; everything else is a constant.  Quoted strings
keep their quotes so ``"bob"`` and ``bob`` stay distinct.
"""

from __future__ import annotations

import re
from typing import List, Optional, Union

from .graph import INSTANCE, Graph, Triple


class PenmanError(ValueError):
    pass


class UnbalancedParentheses(PenmanError):
    pass


class VariableRedeclared(PenmanError):
    pass


class EmptyGraph(PenmanError):
    pass


class MalformedRelation(PenmanError):
    pass


class Unserializable(PenmanError):
    pass


class CorpusParseError(PenmanError):
    def __init__(self, index: int, cause: PenmanError):
        super().__init__(f"graph #{index}: {cause}")
        self.index = index
        self.cause = cause


_TOKEN_RE = re.compile(r'\(|\)|"(?:[^"\\]|\\.)*"|/|:[^\s()"]*|[^\s()"/]+')


class _Node:
    __slots__ = ("var", "concept", "edges")

    def __init__(self, var: str):
        self.var = var
        self.concept: Optional[str] = None
        self.edges: List[tuple] = []


def _tokenize(text: str) -> List[str]:
    tokens = []
    pos = 0
    for m in _TOKEN_RE.finditer(text):
        gap = text[pos:m.start()]
        if gap.strip():
            raise PenmanError(f"unexpected characters {gap.strip()!r}")
        tokens.append(m.group())
        pos = m.end()
    rest = text[pos:]
    if rest.strip():
        if rest.lstrip().startswith('"'):
            raise PenmanError("unterminated string literal")
        raise PenmanError(f"unexpected characters {rest.strip()!r}")
    return tokens


def _parse_tree(tokens: List[str]) -> _Node:
    if not tokens:
        raise EmptyGraph("no graph found")
    depth = 0
    for tok in tokens:
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise UnbalancedParentheses("unexpected ')'")
    if depth != 0:
        raise UnbalancedParentheses(f"{depth} unclosed '('")
    if tokens[0] != "(":
        raise EmptyGraph(f"graph must start with '(', got {tokens[0]!r}")

    pos = 0

    def node() -> _Node:
        nonlocal pos
        pos += 1  # "("
        tok = tokens[pos]
        if tok in ("(", ")", "/") or tok.startswith(":") or tok.startswith('"'):
            raise PenmanError(f"expected a variable after '(', got {tok!r}")
        n = _Node(tok)
        pos += 1
        if tokens[pos] == "/":
            pos += 1
            concept = tokens[pos]
            if concept in ("(", ")", "/") or concept.startswith(":"):
                raise PenmanError(f"missing concept for variable {n.var!r}")
            n.concept = concept
            pos += 1
        while tokens[pos] != ")":
            rel = tokens[pos]
            if not rel.startswith(":"):
                raise PenmanError(f"expected a relation in {n.var!r}, got {rel!r}")
            if rel == ":":
                raise MalformedRelation(f"relation without a label in {n.var!r}")
            pos += 1
            tgt = tokens[pos]
            if tgt == "(":
                n.edges.append((rel, node()))
            elif tgt in (")", "/") or tgt.startswith(":"):
                raise MalformedRelation(f"relation {rel} in {n.var!r} has no target")
            else:
                n.edges.append((rel, tgt))
                pos += 1
        pos += 1  # ")"
        return n

    root = node()
    if pos != len(tokens):
        raise PenmanError(f"trailing tokens after graph: {' '.join(tokens[pos:pos + 5])}")
    return root


def parse_penman(text: str) -> Graph:
    """Parse one Penman expression into a :class:`Graph`."""
    root = _parse_tree(_tokenize(text))

    declared = set()
    stack = [root]
    while stack:
        n = stack.pop()
        if n.var in declared:
            raise VariableRedeclared(f"variable {n.var!r} introduced twice")
        declared.add(n.var)
        stack.extend(t for _, t in n.edges if isinstance(t, _Node))

    triples = set()
    stack = [root]
    while stack:
        n = stack.pop()
        if n.concept is not None:
            triples.add(Triple(n.var, INSTANCE, n.concept))
        for rel, tgt in n.edges:
            if isinstance(tgt, _Node):
                triples.add(Triple(n.var, rel, tgt.var))
                stack.append(tgt)
            else:
                triples.add(Triple(n.var, rel, tgt))
    return Graph(frozenset(triples), root.var, frozenset(declared))


def parse_corpus(text: str) -> List[Graph]:
    """Parse blank-line separated Penman blocks; ``#`` lines are metadata."""
    graphs = []
    for block in _blocks(text):
        try:
            graphs.append(parse_penman(block))
        except PenmanError as e:
            raise CorpusParseError(len(graphs), e) from e
    return graphs


def iter_blocks(text: str) -> List[str]:
    return list(_blocks(text))


def _blocks(text: str):
    current: List[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            continue
        if not stripped:
            if current:
                yield "\n".join(current)
                current = []
            continue
        current.append(line)
    if current:
        yield "\n".join(current)


def serialize_penman(g: Graph, indent: Union[int, None] = 4) -> str:
    """Write ``g`` as Penman text.

    Every variable must be reachable from the root along outgoing edges;
    inverse ``-of`` edges are never introduced, so the output parses back to
    exactly the same triple set.
    """
    if g.root is None or not g.triples:
        raise Unserializable("empty graph")
    if g.root not in g.variables:
        raise Unserializable(f"root {g.root!r} is not a variable")

    out_edges: dict = {}
    for t in sorted(g.triples):
        if t.source not in g.variables:
            raise Unserializable(f"triple with constant source: {t}")
        out_edges.setdefault(t.source, []).append(t)

    placed = set()
    # a variable nests at its first mention in a depth-first walk
    order: list = []

    def visit(v):
        placed.add(v)
        order.append(v)
        for t in out_edges.get(v, []):
            if t.relation != INSTANCE and t.target in g.variables and t.target not in placed:
                visit(t.target)

    visit(g.root)
    missing = g.used_variables() - placed
    if missing:
        raise Unserializable(f"variables unreachable from root: {sorted(missing)}")

    nested = set()

    def render(v, level):
        nested.add(v)
        edges = out_edges.get(v, [])
        concepts = [t.target for t in edges if t.relation == INSTANCE]
        head = f"({v}"
        if concepts:
            head += f" / {concepts[0]}"
        parts = [f":instance {c}" for c in concepts[1:]]
        for t in edges:
            if t.relation == INSTANCE:
                continue
            if t.target in g.variables and t.target not in nested:
                parts.append(f"{t.relation} {render(t.target, level + 1)}")
            else:
                parts.append(f"{t.relation} {t.target}")
        if not parts:
            return head + ")"
        if indent is None:
            return head + " " + " ".join(parts) + ")"
        pad = "\n" + " " * (indent * (level + 1))
        return head + pad + pad.join(parts) + ")"

    return render(g.root, 0)
