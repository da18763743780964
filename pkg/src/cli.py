"""Command-line entry point.

Subcommands:
    test      run one performance test (SCOPE or a baseline) against a trace, a command or a preset
    evaluate  grade a stop-time trace against a ground truth
    simulate  write a synthetic latency trace
    compare   cross-product of workloads x techniques x seeds
    sweep     repeat compare over a parameter grid
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from src.errors import ScopeError, SourceError
from src.generators import generate, list_presets, preset
from src.pipeline import (
    SWEEP_PARAMETERS,
    EvaluationPipeline,
    build_ground_truth,
    build_source,
    evaluate_trace,
    ground_truth_from_series,
    parse_technique,
    run_test_session,
    session_report,
)
from src.schema import RunConfig
from src.utils.config_loader import load_experiment_config, load_settings, resolve_run_config
from src.utils.ingest import parse_samples, write_samples
from src.utils.reports import emit_report, ensure_writable
from src.utils.seeding import derive_seed, fresh_seed

logger = logging.getLogger(__name__)

CRITERION_SECTIONS = ("test", "pt4cloud", "metior", "confirm")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON experiment file; flags override its values")
    parser.add_argument("--seed", type=int, help="Root seed (a fresh one is chosen and printed if omitted)")
    parser.add_argument("--out", help="Output path (default: stdout)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "csv", "text"], help="Report format (default: json)")


def _add_criterion_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("stopping criterion")
    group.add_argument("--cl", type=float, help="Confidence level (default: 0.95)")
    group.add_argument("--r", type=float, help="Relative error margin (default: 0.01)")
    group.add_argument("--interval", type=int, help="Run interval k (default: 5)")
    group.add_argument("--max-samples", type=int, help="Sample cap (default: 1000)")
    group.add_argument("--resamples", type=int, help="Bootstrap resamples (default: 1000)")
    group.add_argument("--tail-margin", type=float, help="Enable the p95 tail check with this margin")
    group.add_argument("--outlier-max", type=float, help="Enable the IQR outlier check with this cap")
    group.add_argument("--p0", type=float, help="pt4cloud objective probability (default: 0.9)")
    group.add_argument("--e0", type=float, help="metior/confirm maximum relative error (default: 0.03)")


def _add_harness_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workload", action="append", help="Preset name, or `desk` for the 30-workload suite (repeatable)")
    parser.add_argument("--technique", action="append", help="Technique id, e.g. scope1 or fixed:500 (repeatable)")
    parser.add_argument("--seeds", type=int, nargs="+", help="Experiment seeds")
    parser.add_argument("--gt-size", type=int, help="Ground-truth size (default: 1000)")
    parser.add_argument("--workers", type=int, help="Worker processes for experiment cells")
    parser.add_argument(
        "--session-stream",
        choices=["independent", "replay"],
        help="Draw each session from its own stream, or replay the ground-truth runs (default: independent)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scope-perftest", description="Decide when repeated latency measurements are enough"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    test = subparsers.add_parser("test", help="Run one performance test")
    _add_common(test)
    _add_format(test)
    _add_criterion_flags(test)
    test.add_argument("--method", help="scope1|scope2|scope3|pt4cloud|metior|confirm|fixed:<N> (default: scope1)")
    source = test.add_mutually_exclusive_group()
    source.add_argument("--input", help="Recorded trace (csv or jsonl)")
    source.add_argument("--exec", dest="exec_command", help="Command whose wall-clock duration is measured")
    source.add_argument("--preset", help=f"Synthetic workload: {', '.join(list_presets())}")
    test.add_argument("--input-format", choices=["csv", "jsonl"], default="csv")
    test.add_argument("--timeout", type=float, default=60.0, help="Per-invocation timeout for --exec, seconds")

    evaluate = subparsers.add_parser("evaluate", help="Grade a trace against a ground truth")
    _add_common(evaluate)
    _add_format(evaluate)
    evaluate.add_argument("--input", required=True, help="Stop-time trace to grade")
    evaluate.add_argument(
        "--input-format", choices=["csv", "jsonl"], default="csv", help="Format of --input and --ground-truth"
    )
    truth = evaluate.add_mutually_exclusive_group(required=True)
    truth.add_argument("--ground-truth", help="Ground-truth trace, read with --input-format")
    truth.add_argument("--preset", help="Build the ground truth from this preset")
    evaluate.add_argument("--gt-size", type=int, help="Ground-truth size for --preset (default: 1000)")
    evaluate.add_argument("--gt-seed", type=int, help="Ground-truth seed for --preset")

    simulate = subparsers.add_parser("simulate", help="Write a synthetic latency trace")
    _add_common(simulate)
    simulate.add_argument("--preset", default="warm", help=f"Workload preset: {', '.join(list_presets())}")
    simulate.add_argument("--count", type=int, help="Number of samples (default: 1000)")
    simulate.add_argument("--format", choices=["csv", "jsonl"], default="csv")

    compare = subparsers.add_parser("compare", help="Compare techniques over workloads and seeds")
    _add_common(compare)
    _add_format(compare)
    _add_criterion_flags(compare)
    _add_harness_flags(compare)
    compare.add_argument("--tables", help="Also write cells/aggregates/failures CSV tables to this directory")

    sweep = subparsers.add_parser("sweep", help="Repeat a comparison over a parameter grid")
    _add_common(sweep)
    _add_format(sweep)
    _add_criterion_flags(sweep)
    _add_harness_flags(sweep)
    sweep.add_argument("--param", choices=list(SWEEP_PARAMETERS), help="Parameter to sweep")
    sweep.add_argument("--values", type=float, nargs="+", help="Parameter values")

    return parser


def _getter(args: argparse.Namespace) -> Callable[[str], Any]:
    """Attribute lookup that tolerates flags a subcommand does not define."""

    def get(name: str) -> Any:
        return getattr(args, name, None)

    return get


def _criterion_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    harness: Dict[str, Any] = {section: {} for section in CRITERION_SECTIONS}
    get = _getter(args)
    if get("cl") is not None:
        for section in ("test", "metior", "confirm"):
            harness[section]["confidence_level"] = args.cl
    if get("r") is not None:
        harness["test"]["error_margin"] = args.r
    for flag, key in (("interval", "run_interval"), ("max_samples", "max_samples")):
        if get(flag) is not None:
            for section in CRITERION_SECTIONS:
                harness[section][key] = get(flag)
    if get("resamples") is not None:
        harness["test"]["bootstrap"] = {"resamples": args.resamples}
        harness["metior"]["bootstrap"] = {"resamples": args.resamples}
    if get("tail_margin") is not None:
        harness["test"]["tail_check"] = {"margin": args.tail_margin}
    if get("outlier_max") is not None:
        harness["test"]["outlier_check"] = {"max_fraction": args.outlier_max}
    if get("p0") is not None:
        harness["pt4cloud"]["objective_probability"] = args.p0
    if get("e0") is not None:
        harness["metior"]["max_error"] = args.e0
        harness["confirm"]["max_error"] = args.e0
    if get("gt_size") is not None:
        harness["ground_truth_size"] = args.gt_size
    if get("session_stream") is not None:
        harness["session_stream"] = args.session_stream
    return harness


def _flag_layer(args: argparse.Namespace) -> Dict[str, Any]:
    get = _getter(args)
    flags: Dict[str, Any] = {
        "harness": _criterion_overrides(args),
        "seed": args.seed,
        "technique": get("method"),
        "workloads": get("workload"),
        "techniques": get("technique"),
        "seeds": get("seeds"),
        "sweep_parameter": get("param"),
        "sweep_values": get("values"),
        "count": get("count"),
        "output": args.out,
        "format": get("format"),
        "workers": get("workers"),
    }
    if args.command == "test":
        if args.input:
            flags["source"] = {"kind": "file", "value": args.input, "format": args.input_format}
        elif args.exec_command:
            flags["source"] = {"kind": "exec", "value": args.exec_command, "timeout": args.timeout}
        elif args.preset:
            flags["source"] = {"kind": "preset", "value": args.preset}
    return flags


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_data = load_experiment_config(args.config) if args.config else None
    chosen = fresh_seed()
    config = resolve_run_config(args.command, chosen, file_data, _flag_layer(args))
    if args.seed is None and config.seed == chosen:
        print(f"🎲 No --seed given; using --seed {config.seed}", file=sys.stderr)
    return config


def _emit(report: Any, config: RunConfig) -> None:
    report = report.model_copy(update={"config": config.model_dump(mode="json")})
    payload = emit_report(report, config.format)  # type: ignore[arg-type]
    if config.output:
        Path(config.output).write_bytes(payload)
        print(f"📄 Report written to {config.output}", file=sys.stderr)
    else:
        sys.stdout.buffer.write(payload)
        if not payload.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")
        sys.stdout.flush()


def _run_test(config: RunConfig) -> int:
    technique = parse_technique(config.technique or "scope1")
    source = build_source(config.source, config.seed)  # type: ignore[arg-type]
    print(f"🚀 Running {technique.label} on {config.source.kind} source {config.source.value!r}", file=sys.stderr)  # type: ignore[union-attr]
    try:
        report = run_test_session(technique, source, config.harness, config.seed)
    except SourceError as exc:
        if exc.partial is not None:
            partial = session_report(exc.partial, config.harness)
            print(
                f"⚠️  Source failed after {partial.stop_location} samples ({partial.rounds} rounds)",
                file=sys.stderr,
            )
        raise
    print(f"✅ {report.terminated_by.value} at {report.stop_location} samples", file=sys.stderr)
    _emit(report, config)
    return 0


def _run_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    stop_series = parse_samples(args.input, args.input_format)
    percentiles = config.harness.reliability_percentiles
    if args.ground_truth:
        recorded = parse_samples(args.ground_truth, args.input_format)
        truth = ground_truth_from_series(recorded, Path(args.ground_truth).stem, 0, percentiles)
    else:
        gt_seed = args.gt_seed if args.gt_seed is not None else derive_seed(config.seed, "ground-truth")
        truth = build_ground_truth(preset(args.preset), gt_seed, config.harness.ground_truth_size, percentiles)
    report = evaluate_trace(stop_series, truth, percentiles)
    print(f"✅ Accuracy {report.accuracy:.2f}% over {report.samples} samples", file=sys.stderr)
    _emit(report, config)
    return 0


def _run_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    count = config.count or 1000
    spec = config.workloads[0].with_seed(config.seed) if config.workloads else preset(args.preset, config.seed)
    values = generate(spec, count)
    fmt = args.format
    if config.output:
        write_samples(values, config.output, fmt)
        print(f"📄 {count} samples of {spec.name} written to {config.output}", file=sys.stderr)
    else:
        write_samples(values, sys.stdout, fmt)
    return 0


def _run_harness(args: argparse.Namespace, config: RunConfig) -> int:
    pipeline = EvaluationPipeline(config.harness, workers=config.workers)
    if config.command == "compare":
        report = pipeline.compare(config.workloads, config.techniques, config.seeds)
        if args.tables:
            for name, path in pipeline.export_to_csv(report, args.tables).items():
                print(f"📄 {name}: {path}", file=sys.stderr)
        _emit(report, config)
        return 0
    sweep = pipeline.sweep(
        config.sweep_parameter,  # type: ignore[arg-type]
        config.sweep_values,
        config.workloads,
        config.techniques,
        config.seeds,
    )
    _emit(sweep, config)
    return 0


def _configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else load_settings().log_level.upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args.verbose)
        config = resolve_config(args)
        if config.output:
            ensure_writable(config.output)
        if config.command == "test":
            return _run_test(config)
        if config.command == "evaluate":
            return _run_evaluate(args, config)
        if config.command == "simulate":
            return _run_simulate(args, config)
        return _run_harness(args, config)
    except (ScopeError, OSError, ValueError) as exc:
        print(f"❌ Error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
