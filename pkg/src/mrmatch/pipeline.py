"""Standardize, optionally compress, align and count one graph pair."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .align import DEFAULT_MATCHER, AlignmentSolution, Matcher, compute_match_weights, solve
from .compress import CompressionRecord, compress_pair, lift_alignment
from .graph import Graph
from .score import PairStats


@dataclass
class PairResult:
    stats: PairStats
    map: Dict[str, str]
    solution: AlignmentSolution


def match_pair(
    a: Graph,
    b: Graph,
    solver: str = "exact",
    *,
    compress: bool = False,
    matcher: Matcher = DEFAULT_MATCHER,
    restarts: int = 4,
    seed: int = 0,
    timeout: float = 240.0,
    cap: int = 8,
) -> PairResult:
    """Align ``a`` to ``b``; the returned map uses original variable names."""
    if compress:
        a, b, rec = compress_pair(a, b)
    else:
        rec = CompressionRecord()
    w = compute_match_weights(a, b, matcher)
    sol = solve(w, solver, restarts=restarts, seed=seed, timeout=timeout, cap=cap)
    stats = PairStats(
        matches=sol.lower,
        size_a=len(a),
        size_b=len(b),
        lower=sol.lower,
        upper=sol.upper,
        optimal=sol.optimal,
        compressed=compress,
    )
    return PairResult(stats, lift_alignment(sol.map, rec), sol)
