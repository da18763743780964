"""Report emission (json, csv, text) and parsing."""

import io
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Union

import pandas as pd
from pydantic import TypeAdapter

from src import templates
from src.schema import (
    ComparisonReport,
    EvaluationReport,
    ExperimentReport,
    Report,
    SessionReport,
    StrategyAggregate,
    SweepReport,
)

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "csv", "text"]
AnyReport = Union[SessionReport, EvaluationReport, ExperimentReport, ComparisonReport, SweepReport]

_REPORT_ADAPTER: TypeAdapter = TypeAdapter(Report)


def _percent(p: float) -> int:
    return round(p * 100)


def _csv_rows(report: AnyReport) -> List[Dict[str, Any]]:
    if isinstance(report, ComparisonReport):
        return [cell.to_csv_row() for cell in report.cells]
    if isinstance(report, ExperimentReport):
        return [report.to_csv_row()]
    if isinstance(report, SweepReport):
        rows = []
        for point in report.points:
            for aggregate in point.aggregates:
                rows.append({report.parameter: point.value, **aggregate.to_csv_row()})
        return rows
    if isinstance(report, SessionReport):
        return [
            {
                "round": index,
                "samples_used": decision.samples_used,
                "verdict": decision.verdict.value,
                "metric_name": decision.metric_name or "",
                "metric": decision.metric if decision.metric is not None else "",
            }
            for index, decision in enumerate(report.decision_trace, start=1)
        ]
    row: Dict[str, Any] = {
        "samples": report.samples,
        "ground_truth_size": report.ground_truth_size,
        "accuracy": round(report.accuracy, 4),
    }
    for p, reliable in sorted(report.reliability.items()):
        row[f"reliable_p{_percent(p)}"] = reliable
    return [row]


def _reliability_lines(reliability: Dict[float, bool]) -> str:
    return "\n".join(
        templates.RELIABILITY_LINE.format(percent=_percent(p), flag="yes" if ok else "no")
        for p, ok in sorted(reliability.items())
    )


def _aggregate_table(aggregates: List[StrategyAggregate]) -> str:
    lines = [
        templates.AGGREGATE_HEADER.format(
            technique="technique",
            experiments="runs",
            failures="fail",
            accuracy="accuracy",
            repetitions="repetitions",
            reliability="reliable fraction",
        )
    ]
    for aggregate in aggregates:
        accuracy = f"{aggregate.mean_accuracy:.2f}%" if aggregate.mean_accuracy is not None else "N/A"
        reliability = " ".join(
            f"p{_percent(p)}={fraction:.2f}" for p, fraction in sorted(aggregate.reliability_fraction.items())
        )
        lines.append(
            templates.AGGREGATE_HEADER.format(
                technique=aggregate.technique,
                experiments=aggregate.experiments,
                failures=aggregate.failures,
                accuracy=accuracy,
                repetitions=aggregate.total_repetitions,
                reliability=reliability,
            )
        )
    return "\n".join(lines)


def _text(report: AnyReport) -> str:
    if isinstance(report, SessionReport):
        percentile_lines = "\n".join(
            templates.PERCENTILE_LINE.format(percent=_percent(p), value=value)
            for p, value in sorted(report.percentiles.items())
        )
        return templates.SESSION_SUMMARY.format(
            technique=report.technique,
            rule=templates.RULE,
            stop_location=report.stop_location,
            rounds=report.rounds,
            terminated_by=report.terminated_by.value,
            verdict=report.verdict.value if report.verdict is not None else "none",
            percentile_lines=percentile_lines,
        )
    if isinstance(report, EvaluationReport):
        return templates.EVALUATION_SUMMARY.format(
            ground_truth_size=report.ground_truth_size,
            rule=templates.RULE,
            samples=report.samples,
            accuracy=report.accuracy,
            reliability_lines=_reliability_lines(report.reliability),
        )
    if isinstance(report, ExperimentReport):
        return templates.EXPERIMENT_SUMMARY.format(
            technique=report.technique,
            workload=report.workload,
            seed=report.seed if report.seed is not None else "N/A",
            rule=templates.RULE,
            stop_location=report.stop_location,
            terminated_by=report.terminated_by.value,
            accuracy=report.accuracy,
            reliability_lines=_reliability_lines(report.reliability),
        )
    if isinstance(report, ComparisonReport):
        return templates.COMPARISON_SUMMARY.format(
            cells=len(report.cells),
            failures=len(report.failures),
            rule=templates.RULE,
            table=_aggregate_table(report.aggregates),
        )
    blocks = [
        f"{report.parameter} = {point.value:g}\n{_aggregate_table(point.aggregates)}" for point in report.points
    ]
    return templates.SWEEP_SUMMARY.format(parameter=report.parameter, rule=templates.RULE, table="\n\n".join(blocks))


def emit_report(report: AnyReport, fmt: ReportFormat = "json") -> bytes:
    """Serialise a report; json is the canonical, versioned form."""
    if fmt == "json":
        return report.model_dump_json(indent=2).encode("utf-8")
    if fmt == "csv":
        buffer = io.StringIO()
        pd.DataFrame(_csv_rows(report)).to_csv(buffer, index=False)
        return buffer.getvalue().encode("utf-8")
    if fmt == "text":
        return _text(report).encode("utf-8")
    raise ValueError(f"Unknown report format: {fmt}")


def parse_report(data: Union[bytes, str]) -> AnyReport:
    """Inverse of the json emitter."""
    return _REPORT_ADAPTER.validate_json(data)


def ensure_writable(path: Union[str, Path]) -> Path:
    """Fail before any computation when the report cannot be written."""
    path = Path(path)
    if path.is_dir():
        raise IsADirectoryError(f"Output path {path} is a directory")
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.exists():
        raise FileNotFoundError(f"Output directory {parent} does not exist")
    target = path if path.exists() else parent
    if not os.access(target, os.W_OK):
        raise PermissionError(f"Output path {path} is not writable")
    return path


def write_report(report: AnyReport, path: Union[str, Path], fmt: ReportFormat = "json") -> Path:
    path = Path(path)
    path.write_bytes(emit_report(report, fmt))
    logger.info("wrote %s report to %s", fmt, path)
    return path
