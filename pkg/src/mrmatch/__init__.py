"""Alignment-based similarity scores for meaning-representation graphs."""

__version__ = "0.1.0"

from .graph import INSTANCE, Graph, Triple  # noqa: E402
from .penman import parse_corpus, parse_penman, serialize_penman  # noqa: E402
from .standardize import (  # noqa: E402
    ReifyMode,
    ReifyRule,
    StandardizeConfig,
    dedupe,
    deinvert,
    dereify,
    lowercase,
    reify,
    standardize,
)
from .compress import CompressionRecord, compress_pair, decompress, lift_alignment  # noqa: E402
from .align import (  # noqa: E402
    AlignmentSolution,
    Matcher,
    MatchWeights,
    brute_force,
    compute_match_weights,
    hill_climb,
    profile_local_optima,
    solve_exact,
)
from .score import PairStats, CorpusScore, bootstrap_ci, count_matches, macro, micro, pair_score  # noqa: E402
from .pipeline import match_pair  # noqa: E402
from .aspects import AspectSpec, REGISTRY, descendant_subgraph, extract_aspect, score_aspect  # noqa: E402
