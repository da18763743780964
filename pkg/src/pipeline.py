"""Evaluation harness: ground truths, technique runs, strategy comparison and sweeps."""

import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import ValidationError
from tqdm import tqdm

from src.baselines import ConfirmCriterion, FixedCriterion, MetiorCriterion, Pt4CloudCriterion
from src.engine import ScopeCriterion, StoppingCriterion, run_session
from src.engine.session import SampleSource
from src.errors import ConfigurationError
from src.generators import as_source, generate, preset
from src.schema import (
    CellFailure,
    CIMethod,
    ComparisonReport,
    EvaluationReport,
    ExperimentReport,
    GroundTruth,
    HarnessConfig,
    SessionReport,
    SessionResult,
    SourceDescriptor,
    StrategyAggregate,
    SweepPoint,
    SweepReport,
    Technique,
    WorkloadSpec,
)
from src.stats import ci_order_statistic, distribution_similarity, percentile
from src.stats.percentiles import SampleSeries
from src.utils.ingest import FileSource
from src.utils.invoker import ExternalCommandSource
from src.utils.seeding import SESSION_STREAM, derive_seed, experiment_seeds

logger = logging.getLogger(__name__)

REFERENCE_LEVEL = 0.95
SWEEP_PARAMETERS = ("error_margin", "run_interval", "objective_probability", "max_error", "ground_truth_size")

_SCOPE_METHODS = {
    "scope1": CIMethod.ORDER_STATISTIC,
    "scope2": CIMethod.BASIC_BOOTSTRAP,
    "scope3": CIMethod.BLOCK_BOOTSTRAP,
}


# --- ground truth and metrics -------------------------------------------------------


def ground_truth_from_series(
    series: SampleSeries,
    workload: str = "trace",
    seed: int = 0,
    percentiles: Iterable[float] = (0.25, 0.50, 0.75, 0.90),
) -> GroundTruth:
    values = [float(v) for v in series]
    reference = {p: ci_order_statistic(values, p, REFERENCE_LEVEL) for p in percentiles}
    return GroundTruth(workload=workload, seed=seed, series=values, reference=reference)


def build_ground_truth(
    workload: WorkloadSpec,
    gt_seed: int,
    size: int = 1000,
    percentiles: Iterable[float] = (0.25, 0.50, 0.75, 0.90),
) -> GroundTruth:
    """`size` samples of the workload drawn with `gt_seed`, plus reference CIs."""
    series = generate(workload.with_seed(gt_seed), size)
    return ground_truth_from_series(series, workload.name, gt_seed, percentiles)


def evaluate_accuracy(stop_series: SampleSeries, gt: GroundTruth) -> float:
    return distribution_similarity(stop_series, gt.series)


def evaluate_reliability(stop_series: SampleSeries, gt: GroundTruth, p: float) -> bool:
    """True iff the stop-time percentile falls inside the ground truth's reference CI."""
    ci = next((ci for key, ci in gt.reference.items() if math.isclose(key, p, abs_tol=1e-12)), None)
    if ci is None or not ci.computable:
        raise ConfigurationError("percentile", f"ground truth has no reference interval at p={p}")
    return ci.contains(percentile(stop_series, p))


# --- single runs ---------------------------------------------------------------------


def build_criterion(technique: Union[Technique, str], config: HarnessConfig, seed: int = 0) -> StoppingCriterion:
    """Stopping criterion for a technique; bootstrap and subsampling seeds derive from `seed`."""
    if isinstance(technique, str):
        technique = parse_technique(technique)
    if technique.kind == "fixed":
        return FixedCriterion(technique.fixed_n)  # type: ignore[arg-type]
    if technique.kind == "pt4cloud":
        return Pt4CloudCriterion(config.pt4cloud)
    if technique.kind == "metior":
        bootstrap = config.metior.bootstrap.model_copy(update={"seed": derive_seed(seed, "metior")})
        return MetiorCriterion(config.metior.model_copy(update={"bootstrap": bootstrap}))
    if technique.kind == "confirm":
        return ConfirmCriterion(config.confirm.model_copy(update={"seed": derive_seed(seed, "confirm")}))
    bootstrap = config.test.bootstrap.model_copy(update={"seed": derive_seed(seed, "bootstrap")})
    test_config = config.test.model_copy(
        update={"ci_method": _SCOPE_METHODS[technique.kind], "bootstrap": bootstrap}
    )
    return ScopeCriterion(test_config)


def parse_technique(text: str) -> Technique:
    try:
        return Technique.parse(text)
    except (ValidationError, ValueError) as exc:
        raise ConfigurationError(
            "method", f"unknown technique {text!r}; use scope1|scope2|scope3|pt4cloud|metior|confirm|fixed:<N>"
        ) from exc


def run_experiment(
    technique: Union[Technique, str],
    workload: WorkloadSpec,
    gt_seed: int,
    config: HarnessConfig,
    ground_truth: Optional[GroundTruth] = None,
    session_seed: Optional[int] = None,
) -> ExperimentReport:
    """Grade one technique on one workload against its ground truth.

    The session stream uses `session_seed`. By default it is derived from
    `gt_seed`, so the technique never sees its grading data; with
    `session_stream="replay"` it equals `gt_seed` and the session re-runs the
    ground-truth invocations in order.
    """
    if isinstance(technique, str):
        technique = parse_technique(technique)
    if ground_truth is None:
        ground_truth = build_ground_truth(
            workload, gt_seed, config.ground_truth_size, config.reliability_percentiles
        )
    if session_seed is None:
        session_seed = gt_seed if config.session_stream == "replay" else derive_seed(gt_seed, SESSION_STREAM)

    criterion = build_criterion(technique, config, session_seed)
    result = run_session(as_source(workload.with_seed(session_seed)), criterion)
    return ExperimentReport(
        technique=technique.label,
        workload=workload.name,
        seed=gt_seed,
        stop_location=result.stop_location,
        terminated_by=result.terminated_by,
        accuracy=evaluate_accuracy(result.final_series, ground_truth),
        reliability={
            p: evaluate_reliability(result.final_series, ground_truth, p) for p in config.reliability_percentiles
        },
        total_repetitions=result.stop_location,
        config={
            "session_seed": session_seed,
            "ground_truth_seed": gt_seed,
            "ground_truth_size": ground_truth.size,
        },
    )


def build_source(descriptor: SourceDescriptor, seed: int) -> SampleSource:
    if descriptor.kind == "file":
        return FileSource(descriptor.value, descriptor.format)
    if descriptor.kind == "exec":
        return ExternalCommandSource(descriptor.value, descriptor.timeout)
    return as_source(preset(descriptor.value, derive_seed(seed, SESSION_STREAM)))


def session_report(result: SessionResult, config: HarnessConfig) -> SessionReport:
    wanted = sorted(set(config.test.checked_percentiles) | set(config.reliability_percentiles))
    percentiles = {p: percentile(result.final_series, p) for p in wanted} if result.final_series else {}
    return SessionReport(
        technique=result.technique,
        stop_location=result.stop_location,
        terminated_by=result.terminated_by,
        verdict=result.final_verdict,
        rounds=len(result.decision_trace),
        percentiles=percentiles,
        decision_trace=result.decision_trace,
    )


def run_test_session(
    technique: Union[Technique, str], source: SampleSource, config: HarnessConfig, seed: int
) -> SessionReport:
    """One performance test against any sample source."""
    criterion = build_criterion(technique, config, seed)
    return session_report(run_session(source, criterion), config)


def evaluate_trace(stop_series: SampleSeries, gt: GroundTruth, percentiles: Sequence[float]) -> EvaluationReport:
    return EvaluationReport(
        samples=len(stop_series),
        ground_truth_size=gt.size,
        accuracy=evaluate_accuracy(stop_series, gt),
        reliability={p: evaluate_reliability(stop_series, gt, p) for p in percentiles},
    )


# --- comparison ---------------------------------------------------------------------

CellResult = Union[ExperimentReport, CellFailure]
_Job = Tuple[WorkloadSpec, int, Tuple[str, ...], HarnessConfig]


def _run_job(job: _Job) -> List[CellResult]:
    """All techniques for one (workload, seed); they share one ground truth."""
    workload, seed, techniques, config = job
    session_seed, gt_seed = experiment_seeds(seed, workload.name)
    if config.session_stream == "replay":
        session_seed = gt_seed
    try:
        ground_truth = build_ground_truth(
            workload, gt_seed, config.ground_truth_size, config.reliability_percentiles
        )
    except Exception as exc:
        return [CellFailure(workload=workload.name, technique=t, seed=seed, error=str(exc)) for t in techniques]

    results: List[CellResult] = []
    for label in techniques:
        try:
            report = run_experiment(
                label, workload, gt_seed, config, ground_truth=ground_truth, session_seed=session_seed
            )
            results.append(report.model_copy(update={"seed": seed}))
        except Exception as exc:
            logger.warning("experiment %s on %s (seed %d) failed: %s", label, workload.name, seed, exc)
            results.append(CellFailure(workload=workload.name, technique=label, seed=seed, error=str(exc)))
    return results


def aggregate_cells(
    technique: str, cells: Sequence[ExperimentReport], failures: int = 0, percentiles: Iterable[float] = ()
) -> StrategyAggregate:
    """Means over successful cells only."""
    if not cells:
        return StrategyAggregate(technique=technique, experiments=0, failures=failures)
    keys = list(percentiles) or sorted(cells[0].reliability)
    return StrategyAggregate(
        technique=technique,
        experiments=len(cells),
        failures=failures,
        mean_accuracy=math.fsum(cell.accuracy for cell in cells) / len(cells),
        reliability_fraction={
            p: math.fsum(1.0 for cell in cells if cell.reliability.get(p)) / len(cells) for p in keys
        },
        total_repetitions=sum(cell.total_repetitions for cell in cells),
    )


def compare_strategies(
    workloads: Sequence[WorkloadSpec],
    techniques: Sequence[str],
    seeds: Sequence[int],
    config: Optional[HarnessConfig] = None,
    workers: int = 1,
    progress: bool = False,
) -> ComparisonReport:
    """Full workload x technique x seed cross-product with per-strategy aggregates.

    Cell order is fixed by the inputs, so the report is identical for any
    worker count.
    """
    if not (workloads and techniques and seeds):
        raise ConfigurationError("compare", "workloads, techniques and seeds must be non-empty")
    config = config or HarnessConfig()
    labels = tuple(parse_technique(t).label for t in techniques)
    jobs: List[_Job] = [(workload, seed, labels, config) for workload in workloads for seed in seeds]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(tqdm(pool.map(_run_job, jobs), total=len(jobs), desc="Experiments", disable=not progress))
    else:
        batches = [_run_job(job) for job in tqdm(jobs, desc="Experiments", disable=not progress)]

    cells: List[ExperimentReport] = []
    failures: List[CellFailure] = []
    for batch in batches:
        for item in batch:
            (failures if isinstance(item, CellFailure) else cells).append(item)  # type: ignore[arg-type]

    aggregates = [
        aggregate_cells(
            label,
            [cell for cell in cells if cell.technique == label],
            sum(1 for failure in failures if failure.technique == label),
            config.reliability_percentiles,
        )
        for label in labels
    ]
    logger.info("compared %d techniques over %d cells (%d failures)", len(labels), len(cells), len(failures))
    return ComparisonReport(cells=cells, failures=failures, aggregates=aggregates)


def apply_parameter(config: HarnessConfig, parameter: str, value: float) -> HarnessConfig:
    """Copy of `config` with one sweep parameter set."""
    if parameter == "run_interval":
        if value != int(value):
            raise ConfigurationError(parameter, f"must be a whole number, got {value}")
        return config.with_run_interval(int(value))
    data = config.model_dump()
    if parameter == "error_margin":
        data["test"]["error_margin"] = value
    elif parameter == "objective_probability":
        data["pt4cloud"]["objective_probability"] = value
    elif parameter == "max_error":
        data["metior"]["max_error"] = value
        data["confirm"]["max_error"] = value
    elif parameter == "ground_truth_size":
        if value != int(value):
            raise ConfigurationError(parameter, f"must be a whole number, got {value}")
        data["ground_truth_size"] = int(value)
    else:
        raise ConfigurationError("param", f"unknown sweep parameter {parameter!r}; choose from {', '.join(SWEEP_PARAMETERS)}")
    try:
        return HarnessConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(parameter, str(exc.errors()[0]["msg"])) from exc


def run_sweep(
    parameter: str,
    values: Sequence[float],
    workloads: Sequence[WorkloadSpec],
    techniques: Sequence[str],
    seeds: Sequence[int],
    config: Optional[HarnessConfig] = None,
    workers: int = 1,
    progress: bool = False,
) -> SweepReport:
    """One comparison per parameter value, keeping only the aggregates."""
    config = config or HarnessConfig()
    swept = [(value, apply_parameter(config, parameter, value)) for value in values]
    points = []
    for value, point_config in tqdm(swept, desc=f"Sweep {parameter}", disable=not progress):
        comparison = compare_strategies(workloads, techniques, seeds, point_config, workers)
        points.append(SweepPoint(value=value, aggregates=comparison.aggregates))
    return SweepReport(parameter=parameter, points=points)


class EvaluationPipeline:
    """Runs comparisons and sweeps for one harness configuration and exports tables."""

    def __init__(self, config: Optional[HarnessConfig] = None, workers: int = 1, progress: bool = True):
        self.config = config or HarnessConfig()
        self.workers = workers
        self.progress = progress

    def compare(
        self, workloads: Sequence[WorkloadSpec], techniques: Sequence[str], seeds: Sequence[int]
    ) -> ComparisonReport:
        print(f"🚀 Comparing {len(techniques)} techniques on {len(workloads)} workloads x {len(seeds)} seeds", file=sys.stderr)
        report = compare_strategies(workloads, techniques, seeds, self.config, self.workers, self.progress)
        print(f"✅ {len(report.cells)} experiments complete, {len(report.failures)} failed", file=sys.stderr)
        return report

    def sweep(
        self,
        parameter: str,
        values: Sequence[float],
        workloads: Sequence[WorkloadSpec],
        techniques: Sequence[str],
        seeds: Sequence[int],
    ) -> SweepReport:
        print(f"🚀 Sweeping {parameter} over {len(values)} values", file=sys.stderr)
        report = run_sweep(parameter, values, workloads, techniques, seeds, self.config, self.workers, self.progress)
        print(f"✅ Sweep complete ({len(report.points)} points)", file=sys.stderr)
        return report

    def export_to_csv(self, report: ComparisonReport, output_dir: Union[str, Path]) -> Dict[str, str]:
        """Write per-cell, aggregate and failure tables.

        Returns:
            Dictionary mapping table names to their CSV file paths
        """
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        tables = {
            "cells": pd.DataFrame([cell.to_csv_row() for cell in report.cells]),
            "aggregates": pd.DataFrame([aggregate.to_csv_row() for aggregate in report.aggregates]),
            "failures": pd.DataFrame(
                [failure.model_dump() for failure in report.failures],
                columns=["workload", "technique", "seed", "error"],
            ),
        }
        csv_paths = {}
        for name, df in tables.items():
            path = output_dir / f"{name}.csv"
            df.to_csv(path, index=False)
            csv_paths[name] = str(path)
        return csv_paths
