"""Command line entry point: ``mrmatch score`` and ``mrmatch profile``."""

from __future__ import annotations

import argparse
import sys

from .align import SOLVERS
from .corpus import (
    CorpusLengthMismatch,
    RunConfig,
    default_registry,
    default_standardize_config,
    dumps,
    format_text,
    profile,
    resolve_aspects,
    run,
)
from .standardize import RuleTableInvalid


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("corpus_a", help="Penman corpus scored as the first graph of each pair (precision side)")
    p.add_argument("corpus_b", help="Penman corpus scored as the second graph (recall side, usually gold)")
    p.add_argument("--reify-mode", choices=["dereify", "reify", "none"], default="dereify")
    p.add_argument("--rules", help="reification rule table (TSV); env MRMATCH_REIFY_RULES")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--no-deinvert", action="store_true")
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("score", help="score two corpora graph by graph")
    _common(sc)
    sc.add_argument("--solver", choices=SOLVERS, default="exact")
    sc.add_argument("--restarts", type=int, default=4, help="hill-climber restarts")
    sc.add_argument("--timeout", type=float, default=240.0, help="exact solver seconds per pair")
    sc.add_argument("--cap", type=int, default=8, help="brute-force variable cap")
    sc.add_argument("--compress", action="store_true", help="lossless pair compression before alignment")
    sc.add_argument("--aspects", default="none", help="comma list of aspect names, 'all' or 'none'")
    sc.add_argument("--aspect-registry", help="extra aspect definitions (TSV); env MRMATCH_ASPECTS")
    sc.add_argument("--averaging", choices=["micro", "macro", "both"], default="both")
    sc.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples, 0 disables")
    sc.add_argument("--level", type=float, default=0.95)
    sc.add_argument("--workers", type=int, default=1)
    sc.add_argument("--timings", action="store_true", help="include per-pair solve times (not reproducible)")
    sc.add_argument("--json", dest="json_path", help="write the JSON report here ('-' for stdout)")

    pr = sub.add_parser("profile", help="count distinct hill-climber local optima per pair")
    _common(pr)
    pr.add_argument("--tries", type=int, default=20)
    pr.add_argument("--json", dest="json_path", help="write the JSON profile here ('-' for stdout)")
    return parser


def _config(args) -> RunConfig:
    std = default_standardize_config(
        args.reify_mode,
        args.rules,
        lowercase=not args.no_lowercase,
        deinvert=not args.no_deinvert,
        dedupe=not args.no_dedupe,
    )
    if args.command == "profile":
        return RunConfig(args.corpus_a, args.corpus_b, std, solver="hillclimb", seed=args.seed)
    if args.aspect_registry:
        from .aspects import load_registry

        registry = load_registry(args.aspect_registry)
    else:
        registry = default_registry()
    names = [n.strip() for n in args.aspects.split(",") if n.strip()]
    return RunConfig(
        args.corpus_a,
        args.corpus_b,
        std,
        solver=args.solver,
        restarts=args.restarts,
        timeout=args.timeout,
        cap=args.cap,
        compress=args.compress,
        aspects=resolve_aspects(names, registry),
        averaging=args.averaging,
        bootstrap=args.bootstrap,
        level=args.level,
        seed=args.seed,
        workers=args.workers,
        timings=args.timings,
        registry=registry,
    )


def _emit(text: str, path) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "profile":
            report = profile(cfg, args.tries)
            if args.json_path:
                _emit(dumps(report), args.json_path)
            if args.json_path != "-":
                print(f"pairs: {len(report['points'])}  mean unique optima: {report['mean_unique_optima']:.2f}  slope: {report['slope']:.4f}")
            return 0
        report = run(cfg)
    except (CorpusLengthMismatch, RuleTableInvalid, KeyError, OSError, ValueError) as e:
        print(f"mrmatch: error: {e}", file=sys.stderr)
        return 2
    if args.json_path:
        _emit(dumps(report), args.json_path)
    if args.json_path != "-":
        sys.stdout.write(format_text(report))
    return 1 if report["errors"] else 0


if __name__ == "__main__":
    sys.exit(main())
