"""CI-correctness baseline: averaged subsample median CIs within e0 of the median.

Each round draws ``floor(n / 2)`` samples without replacement, takes the
order-statistic median CI of that subsample, and the lower and upper bounds
are averaged over all rounds.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src.schema import ConfirmConfig, ErrorStep, StopDecision, Verdict
from src.stats import as_array, order_statistic_indices, percentile, zero_spread_interval
from src.stats.percentiles import SampleSeries

logger = logging.getLogger(__name__)

MEDIAN = 0.5
MIN_SERIES = 10


def _averaged_bounds(values: np.ndarray, cfg: ConfirmConfig) -> Optional[Tuple[float, float]]:
    half = values.size // 2
    lower_index, upper_index = order_statistic_indices(half, MEDIAN, cfg.confidence_level)
    if not 1 <= lower_index < upper_index <= half:
        return None
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    keys = rng.random((cfg.subsample_rounds, values.size))
    picks = np.argsort(keys, axis=1)[:, :half]
    subsamples = np.sort(values[picks], axis=1)
    return float(subsamples[:, lower_index - 1].mean()), float(subsamples[:, upper_index - 1].mean())


def confirm_step(accumulated: SampleSeries, cfg: ConfirmConfig) -> ErrorStep:
    values = as_array(accumulated)
    if values.size < MIN_SERIES:
        return ErrorStep(verdict=Verdict.CONTINUE, relative_error=None)

    exact = zero_spread_interval(values, MEDIAN, cfg.confidence_level)
    bounds = (exact.lower, exact.upper) if exact is not None else _averaged_bounds(values, cfg)
    if bounds is None:
        logger.debug("confirm: subsample median CI not computable at n=%d", values.size)
        return ErrorStep(verdict=Verdict.CONTINUE, relative_error=None)

    lower, upper = bounds
    median = percentile(values, MEDIAN)
    relative_error = max(median - lower, upper - median) / median  # type: ignore[operator]
    within = median * (1.0 - cfg.max_error) <= lower and upper <= median * (1.0 + cfg.max_error)  # type: ignore[operator]
    return ErrorStep(verdict=Verdict.STOP if within else Verdict.CONTINUE, relative_error=relative_error)


class ConfirmCriterion:
    name = "confirm"

    def __init__(self, cfg: ConfirmConfig):
        self.cfg = cfg
        self.run_interval = cfg.run_interval
        self.max_samples = cfg.max_samples

    def evaluate(self, series: np.ndarray) -> StopDecision:
        step = confirm_step(series, self.cfg)
        return StopDecision(
            verdict=step.verdict,
            samples_used=len(series),
            technique=self.name,
            metric_name="relative_error",
            metric=step.relative_error,
        )
