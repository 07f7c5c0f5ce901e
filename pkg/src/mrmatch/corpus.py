"""Corpus-level evaluation: pair graphs by position, score them, aggregate."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .align import compute_match_weights, profile_local_optima
from .aspects import REGISTRY, AspectSpec, get_aspect, load_registry, score_aspect
from .graph import Graph
from .penman import PenmanError, iter_blocks, parse_penman
from .pipeline import match_pair
from .score import PairStats, aggregate, bound_gap, pair_score
from .standardize import ReifyMode, StandardizeConfig, load_rules, standardize

SCHEMA_VERSION = 1
RULES_ENV = "MRMATCH_REIFY_RULES"
ASPECTS_ENV = "MRMATCH_ASPECTS"


class CorpusLengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    path_a: str
    path_b: str
    standardize: StandardizeConfig = field(default_factory=StandardizeConfig)
    solver: str = "exact"
    restarts: int = 4
    timeout: float = 240.0
    cap: int = 8
    compress: bool = False
    aspects: Tuple[str, ...] = ()
    averaging: str = "both"
    bootstrap: int = 1000
    level: float = 0.95
    seed: int = 42
    workers: int = 1
    timings: bool = False
    registry: Optional[Dict[str, AspectSpec]] = None

    def echo(self) -> dict:
        std = self.standardize
        return {
            "path_a": self.path_a,
            "path_b": self.path_b,
            "standardize": {
                "lowercase": std.lowercase,
                "deinvert": std.deinvert,
                "dedupe": std.dedupe,
                "reify_mode": std.reify_mode.value,
                "deinvert_exceptions": sorted(std.deinvert_exceptions),
                "rules": len(std.rule_table),
            },
            "solver": self.solver,
            "restarts": self.restarts,
            "timeout": self.timeout,
            "cap": self.cap,
            "compress": self.compress,
            "aspects": list(self.aspects),
            "averaging": self.averaging,
            "bootstrap": self.bootstrap,
            "level": self.level,
            "seed": self.seed,
        }


def default_standardize_config(reify_mode: str = "dereify", rules_path: Optional[str] = None, **flags) -> StandardizeConfig:
    """Standardization settings, honouring the rule-table environment override."""
    rules_path = rules_path or os.environ.get(RULES_ENV)
    return StandardizeConfig(
        reify_mode=ReifyMode(reify_mode),
        rule_table=load_rules(rules_path),
        **flags,
    )


def resolve_aspects(names: Sequence[str], registry: Optional[Dict[str, AspectSpec]] = None) -> Tuple[str, ...]:
    reg = registry if registry is not None else default_registry()
    if list(names) == ["all"]:
        return tuple(reg)
    if list(names) in ([], ["none"]):
        return ()
    for n in names:
        get_aspect(n, reg)
    return tuple(names)


def default_registry() -> Dict[str, AspectSpec]:
    path = os.environ.get(ASPECTS_ENV)
    return load_registry(path) if path else dict(REGISTRY)


def read_blocks(path: str) -> List[str]:
    return iter_blocks(Path(path).read_text("utf-8"))


def _score_pair(args) -> dict:
    index, text_a, text_b, cfg = args
    row: dict = {"index": index}
    try:
        a = standardize(parse_penman(text_a), cfg.standardize)
        b = standardize(parse_penman(text_b), cfg.standardize)
        res = match_pair(
            a,
            b,
            cfg.solver,
            compress=cfg.compress,
            restarts=cfg.restarts,
            seed=cfg.seed ^ index,
            timeout=cfg.timeout,
            cap=cfg.cap,
        )
        s = res.stats
        p, r, f1 = pair_score(s)
        row.update(
            matches=s.matches,
            size_a=s.size_a,
            size_b=s.size_b,
            lower=s.lower,
            upper=s.upper,
            optimal=s.optimal,
            precision=p,
            recall=r,
            f1=f1,
        )
        if cfg.timings:
            row["elapsed"] = res.solution.elapsed
        if cfg.aspects:
            reg = cfg.registry if cfg.registry is not None else REGISTRY
            row["aspects"] = {}
            for name in cfg.aspects:
                st = score_aspect(
                    a,
                    b,
                    get_aspect(name, reg),
                    cfg.solver,
                    rules=cfg.standardize.rule_table,
                    restarts=cfg.restarts,
                    seed=cfg.seed ^ index,
                    timeout=cfg.timeout,
                    cap=cfg.cap,
                )
                row["aspects"][name] = asdict(st)
    except (PenmanError, ValueError, RuntimeError) as e:
        row = {"index": index, "error": f"{type(e).__name__}: {e}"}
    return row


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (workers * 4))))


def _aggregate(stats: List[PairStats], cfg: RunConfig) -> dict:
    if not stats:
        return {}
    modes = ["micro", "macro"] if cfg.averaging == "both" else [cfg.averaging]
    out = {}
    for mode in modes:
        out[mode] = aggregate(stats, mode, cfg.bootstrap or None, cfg.level, cfg.seed).as_dict()
    return out


def run(cfg: RunConfig) -> dict:
    """Score two corpora pairwise (i-th graph against i-th graph)."""
    blocks_a = read_blocks(cfg.path_a)
    blocks_b = read_blocks(cfg.path_b)
    if len(blocks_a) != len(blocks_b):
        raise CorpusLengthMismatch(
            f"{cfg.path_a} has {len(blocks_a)} graphs but {cfg.path_b} has {len(blocks_b)}"
        )
    tasks = [(i, ta, tb, cfg) for i, (ta, tb) in enumerate(zip(blocks_a, blocks_b))]
    rows = _map(_score_pair, tasks, cfg.workers)

    ok = [r for r in rows if "error" not in r]
    stats = [
        PairStats(r["matches"], r["size_a"], r["size_b"], r["lower"], r["upper"], r["optimal"], cfg.compress)
        for r in ok
    ]
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": cfg.echo(),
        "n_pairs": len(rows),
        "compressed": cfg.compress,
        "pairs": rows,
        "errors": [{"index": r["index"], "error": r["error"]} for r in rows if "error" in r],
        "corpus": _aggregate(stats, cfg),
        "bound_gap": bound_gap(stats),
        "all_optimal": all(s.optimal for s in stats),
    }
    if cfg.aspects:
        report["aspects"] = {}
        for name in cfg.aspects:
            ast = [PairStats(**r["aspects"][name]) for r in ok]
            report["aspects"][name] = _aggregate(ast, cfg)
    return report


def profile(cfg: RunConfig, tries: int = 20) -> dict:
    """Count distinct local optima reached by ``tries`` random-start climbs per pair."""
    blocks_a = read_blocks(cfg.path_a)
    blocks_b = read_blocks(cfg.path_b)
    if len(blocks_a) != len(blocks_b):
        raise CorpusLengthMismatch(f"{len(blocks_a)} vs {len(blocks_b)} graphs")
    graphs = [
        (standardize(parse_penman(ta), cfg.standardize), standardize(parse_penman(tb), cfg.standardize))
        for ta, tb in zip(blocks_a, blocks_b)
    ]
    return profile_pairs(graphs, tries, cfg.seed)


def profile_pairs(pairs: Sequence[Tuple[Graph, Graph]], tries: int = 20, seed: int = 0) -> dict:
    points = []
    for i, (a, b) in enumerate(pairs):
        w = compute_match_weights(a, b)
        values = profile_local_optima(w, tries, seed ^ i)
        points.append(
            {
                "index": i,
                "variables": w.n + w.m,
                "unique_optima": len({round(v, 9) for v in values}),
            }
        )
    xs = np.array([p["variables"] for p in points], dtype=float)
    ys = np.array([p["unique_optima"] for p in points], dtype=float)
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(points) > 1 and np.ptp(xs) > 0 else 0.0
    return {
        "schema_version": SCHEMA_VERSION,
        "tries": tries,
        "points": points,
        "mean_unique_optima": float(ys.mean()) if len(ys) else 0.0,
        "slope": slope,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _pct(x: float) -> str:
    return f"{100 * x:.1f}"


def format_text(report: dict) -> str:
    lines = [f"pairs: {report['n_pairs']}  compressed: {str(report['compressed']).lower()}"]
    for mode, sc in report.get("corpus", {}).items():
        line = f"{mode:>5}  P {_pct(sc['precision'])}  R {_pct(sc['recall'])}  F1 {_pct(sc['f1'])}"
        if "ci" in sc:
            lo, hi = sc["ci"]["f1"]
            line += f"  F1 CI [{_pct(lo)}, {_pct(hi)}]"
        lines.append(line)
    lines.append(f"bound gap: {report['bound_gap']:g}  all optimal: {str(report['all_optimal']).lower()}")
    for name, agg in report.get("aspects", {}).items():
        for mode, sc in agg.items():
            lines.append(f"aspect {name:<16} {mode:>5}  F1 {_pct(sc['f1'])}")
    for err in report["errors"]:
        lines.append(f"error in pair {err['index']}: {err['error']}")
    return "\n".join(lines) + "\n"
