"""Command-line front end.

Exit status is 0 on success, 1 when the input model is invalid and 2 on any
other failure (unreadable files, store errors, oracle mismatch).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from typing import Optional, Sequence

from . import __version__
from .bench import ENGINES, bench
from .corpus import CorpusSpec, generate_model
from .engine import AnalysisConfig, analyze
from .model import ModelError
from .oracle import BudgetExceeded, naive_least_fixpoint
from .pta import analyze_pta
from .report import compare, dumps, result_to_json, result_to_text
from .textformat import load_model, serialize_model
from .validate import ModelViolations

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_INTERNAL = 2

THREADS_ENV = "RTAKIT_THREADS"
log = logging.getLogger("rtakit")


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise SystemExit(f"rtakit: {THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, value)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("thread counts must be positive")
    return values


def _engine_list(text: str) -> list[str]:
    engines = [e.strip() for e in text.split(",") if e.strip()]
    bad = [e for e in engines if e not in ENGINES]
    if bad or not engines:
        raise argparse.ArgumentTypeError(f"engines must be drawn from {','.join(ENGINES)}")
    return engines


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load(path: str):
    start = time.perf_counter()
    model = load_model(path)
    return model, time.perf_counter() - start


def cmd_analyze(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    model, parse_s = _load(args.model)
    config = AnalysisConfig(
        threads=args.threads,
        distinguish_special_invokes=not args.no_special_distinction,
        summary_store_path=args.summaries,
        emit_summaries_path=args.emit_summaries,
    )
    if args.engine == "rta":
        result = analyze(model, config)
    else:
        if args.summaries or args.emit_summaries:
            log.warning("summary stores are only used by the rta engine; ignoring")
            config.summary_store_path = config.emit_summaries_path = None
        result, graph = analyze_pta(model, config)
        if args.graph:
            _write(args.graph, graph.dump())
    timings = {
        "parse": parse_s,
        "analysis": result.diagnostics.analysis_seconds,
        "total": time.perf_counter() - t0,
    }
    if args.report == "json":
        cfg = {
            "threads": config.threads,
            "distinguish_special_invokes": config.distinguish_special_invokes,
            "summaries": config.summary_store_path,
            "emit_summaries": config.emit_summaries_path,
        }
        _write(args.out, dumps(result_to_json(result, args.model, cfg, timings)))
    else:
        _write(args.out, result_to_text(result, timings))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    model, parse_s = _load(args.model)
    config = AnalysisConfig(threads=args.threads)
    pta, _ = analyze_pta(model, config)
    rta = analyze(model, config)
    timings = {
        "pta": {"parse": parse_s, "analysis": pta.diagnostics.analysis_seconds},
        "rta": {"parse": parse_s, "analysis": rta.diagnostics.analysis_seconds},
    }
    for name in timings:
        timings[name]["total"] = timings[name]["parse"] + timings[name]["analysis"]
    diff = compare(pta, rta, "pta", "rta", timings)
    _write(args.out, dumps(diff.to_json()) if args.report == "json" else diff.to_text())
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = CorpusSpec(
            seed=args.seed,
            type_count=args.types,
            method_count=args.methods,
            max_hierarchy_depth=args.depth,
            interface_density=args.interface_density,
            call_density=args.call_density,
            field_density=args.field_density,
            heap_object_count=args.heap_objects,
        )
    except ValueError as exc:
        print(f"rtakit: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _write(args.out, serialize_model(generate_model(spec)))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    model, _ = _load(args.model)
    flag = not args.no_special_distinction
    expected = naive_least_fixpoint(model, flag, max_rounds=args.max_rounds)
    actual = analyze(model, AnalysisConfig(threads=args.threads, distinguish_special_invokes=flag))
    bad = actual.mismatches(expected)
    for name in bad:
        extra = sorted(map(str, getattr(actual, name) - getattr(expected, name)))
        missing = sorted(map(str, getattr(expected, name) - getattr(actual, name)))
        print(f"MISMATCH {name}: engine-only {extra} oracle-only {missing}")
    if bad:
        return EXIT_INTERNAL
    print(f"ok: engine matches least fixpoint ({len(expected.reachable_methods)} reachable methods)")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    model, _ = _load(args.model)
    report = bench(model, args.engines, args.threads, args.repetitions)
    _write(args.out, dumps(report.to_json()) if args.report == "json" else report.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtakit", description="Reachability analysis for closed-world program models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    threads_default = _default_threads()

    def common(p: argparse.ArgumentParser, report: bool = True) -> None:
        p.add_argument("--model", required=True, help="model file")
        p.add_argument("--threads", type=_positive, default=threads_default,
                       help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if report:
            p.add_argument("--report", choices=("text", "json"), default="text")

    p = sub.add_parser("analyze", help="run one analysis and report the reachable elements")
    common(p)
    p.add_argument("--engine", choices=ENGINES, default="rta")
    p.add_argument("--summaries", help="summary store to reuse (rta)")
    p.add_argument("--emit-summaries", help="write reusable summaries here after the run (rta)")
    p.add_argument("--no-special-distinction", action="store_true",
                   help="treat invoke special like a direct call")
    p.add_argument("--graph", help="write the type-flow graph here (pta)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="diff points-to analysis against rapid type analysis")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a synthetic model")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--types", type=int, default=10)
    p.add_argument("--methods", type=int, default=30)
    p.add_argument("--depth", type=int, default=4, help="maximum hierarchy depth")
    p.add_argument("--interface-density", type=float, default=0.3)
    p.add_argument("--call-density", type=float, default=0.5)
    p.add_argument("--field-density", type=float, default=0.3)
    p.add_argument("--heap-objects", type=int, default=8)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", help="check the engine against the brute-force fixpoint")
    common(p, report=False)
    p.add_argument("--no-special-distinction", action="store_true")
    p.add_argument("--max-rounds", type=int, default=10_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time engines across thread counts")
    p.add_argument("--model", required=True)
    p.add_argument("--engines", type=_engine_list, default=list(ENGINES))
    p.add_argument("--threads", type=_int_list, default=[1, 4, 8, 16])
    p.add_argument("--repetitions", type=_positive, default=3)
    p.add_argument("--report", choices=("text", "json"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ModelViolations as exc:
        print(f"rtakit: invalid model {getattr(args, 'model', '')}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_MODEL
    except ModelError as exc:
        print(f"rtakit: {getattr(args, 'model', '')}:{exc}", file=sys.stderr)
        return EXIT_MODEL
    except BudgetExceeded as exc:
        print(f"rtakit: oracle budget exceeded: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (OSError, ValueError, LookupError) as exc:
        print(f"rtakit: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"rtakit: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
