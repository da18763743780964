"""Metric-stability baseline: block-bootstrap median CI within e0 of the median."""

import numpy as np

from src.schema import ErrorStep, MetiorConfig, StopDecision, Verdict
from src.stats import as_array, ci_block_bootstrap, percentile, zero_spread_interval
from src.stats.intervals import MIN_BLOCK_SERIES
from src.stats.percentiles import SampleSeries

MEDIAN = 0.5


def metior_step(accumulated: SampleSeries, cfg: MetiorConfig) -> ErrorStep:
    values = as_array(accumulated)
    if values.size < MIN_BLOCK_SERIES:
        return ErrorStep(verdict=Verdict.CONTINUE, relative_error=None)
    ci = zero_spread_interval(values, MEDIAN, cfg.confidence_level) or ci_block_bootstrap(
        values, MEDIAN, cfg.confidence_level, cfg.bootstrap
    )
    median = percentile(values, MEDIAN)
    relative_error = max(median - ci.lower, ci.upper - median) / median  # type: ignore[operator]
    verdict = Verdict.STOP if relative_error <= cfg.max_error else Verdict.CONTINUE
    return ErrorStep(verdict=verdict, relative_error=relative_error)


class MetiorCriterion:
    name = "metior"

    def __init__(self, cfg: MetiorConfig):
        self.cfg = cfg
        self.run_interval = cfg.run_interval
        self.max_samples = cfg.max_samples

    def evaluate(self, series: np.ndarray) -> StopDecision:
        step = metior_step(series, self.cfg)
        return StopDecision(
            verdict=step.verdict,
            samples_used=len(series),
            technique=self.name,
            metric_name="relative_error",
            metric=step.relative_error,
        )
