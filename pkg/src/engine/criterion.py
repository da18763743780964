"""The stopping criterion: desired-CI checks, accuracy check and consistency check."""

import hashlib
import logging
from typing import Optional, Tuple

import numpy as np

from src.errors import SeriesTooShortError
from src.schema import (
    AccuracyDiagnostics,
    CIMethod,
    ConfidenceInterval,
    PercentileCheck,
    StopDecision,
    TestConfig,
    Verdict,
)
from src.stats import (
    as_array,
    ci_basic_bootstrap,
    ci_block_bootstrap,
    ci_order_statistic,
    iqr_outlier_fraction,
    percentile,
    zero_spread_interval,
)
from src.stats.percentiles import SampleSeries

logger = logging.getLogger(__name__)


def compute_interval(series: SampleSeries, p: float, config: TestConfig) -> ConfidenceInterval:
    """CI at percentile p using the configured method.

    Constant sets get their exact interval [c, c]; sets too short for the
    block bootstrap are reported as non-computable.
    """
    values = as_array(series)
    level = config.confidence_level
    exact = zero_spread_interval(values, p, level)
    if exact is not None:
        return exact
    if config.ci_method == CIMethod.ORDER_STATISTIC:
        return ci_order_statistic(values, p, level)
    if config.ci_method == CIMethod.BASIC_BOOTSTRAP:
        return ci_basic_bootstrap(values, p, level, config.bootstrap)
    try:
        return ci_block_bootstrap(values, p, level, config.bootstrap)
    except SeriesTooShortError:
        return ConfidenceInterval.not_computable(p, level)


def desired_ci_exists(
    series: SampleSeries, p: float, config: TestConfig, margin: float
) -> PercentileCheck:
    """Whether the CI at p lies inside [observed * (1 - margin), observed * (1 + margin)]."""
    values = as_array(series)
    observed = percentile(values, p)
    ci = compute_interval(values, p, config)
    margin_low = observed * (1.0 - margin)
    margin_high = observed * (1.0 + margin)
    dci = bool(ci.computable and margin_low <= ci.lower and ci.upper <= margin_high)  # type: ignore[operator]
    return PercentileCheck(
        percentile=p,
        observed=observed,
        ci=ci,
        margin_low=margin_low,
        margin_high=margin_high,
        dci=dci,
    )


def accuracy_check(series: SampleSeries, config: TestConfig) -> AccuracyDiagnostics:
    """Conjunction of the desired-CI checks plus any enabled tail/outlier checks."""
    values = as_array(series)
    checks = [
        desired_ci_exists(values, p, config, config.error_margin)
        for p in config.checked_percentiles
    ]
    flags = [check.dci for check in checks]

    tail = None
    if config.tail_check is not None:
        tail = desired_ci_exists(values, config.tail_check.percentile, config, config.tail_check.margin)
        flags.append(tail.dci)

    outlier_fraction = None
    outlier_passed = None
    if config.outlier_check is not None:
        outlier_fraction = iqr_outlier_fraction(values)
        outlier_passed = outlier_fraction <= config.outlier_check.max_fraction
        flags.append(outlier_passed)

    return AccuracyDiagnostics(
        n=values.size,
        checks=checks,
        tail=tail,
        outlier_fraction=outlier_fraction,
        outlier_passed=outlier_passed,
        passed=all(flags),
    )


def consistency_check(
    s_cur: SampleSeries,
    config: TestConfig,
    previous: Optional[AccuracyDiagnostics] = None,
) -> StopDecision:
    """Stop iff the accuracy check passes on S_cur and on S_pre.

    S_pre is S_cur without its final run_interval samples. `previous` may carry
    an already computed accuracy check for exactly that S_pre.
    """
    values = as_array(s_cur)
    current = accuracy_check(values, config)
    s_pre = values[: max(values.size - config.run_interval, 0)]
    if s_pre.size == 0:
        return StopDecision(verdict=Verdict.CONTINUE, samples_used=values.size, current=current)
    if previous is None or previous.n != s_pre.size:
        previous = accuracy_check(s_pre, config)
    verdict = Verdict.STOP if current.passed and previous.passed else Verdict.CONTINUE
    return StopDecision(
        verdict=verdict,
        samples_used=values.size,
        current=current,
        previous=previous,
    )


def _fingerprint(values: np.ndarray) -> bytes:
    return hashlib.blake2b(values.tobytes(), digest_size=16).digest()


class ScopeCriterion:
    """SCOPE stopping criterion bound to a TestConfig.

    Remembers the last S_cur check so the next round can reuse it as S_pre
    when the intervening batch was exactly run_interval samples.
    """

    def __init__(self, config: TestConfig, name: Optional[str] = None):
        self.config = config
        self.name = name or _scope_name(config)
        self.run_interval = config.run_interval
        self.max_samples = config.max_samples
        self._memo: Optional[Tuple[bytes, AccuracyDiagnostics]] = None

    def evaluate(self, series: np.ndarray) -> StopDecision:
        values = as_array(series)
        previous = None
        cut = values.size - self.run_interval
        if self._memo is not None and cut > 0:
            fingerprint, diagnostics = self._memo
            if diagnostics.n == cut and fingerprint == _fingerprint(values[:cut]):
                previous = diagnostics
        decision = consistency_check(values, self.config, previous=previous)
        self._memo = (_fingerprint(values), decision.current)  # type: ignore[assignment]
        decision = decision.model_copy(update={"technique": self.name})
        logger.debug(
            "%s n=%d verdict=%s", self.name, decision.samples_used, decision.verdict.value
        )
        return decision


def _scope_name(config: TestConfig) -> str:
    return {
        CIMethod.ORDER_STATISTIC: "scope1",
        CIMethod.BASIC_BOOTSTRAP: "scope2",
        CIMethod.BLOCK_BOOTSTRAP: "scope3",
    }[config.ci_method]
