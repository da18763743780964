"""Tests for percentiles, confidence intervals and distribution similarity."""

import math

import numpy as np
import pytest

from src.errors import ConfigurationError, EmptySeriesError, SeriesTooShortError
from src.schema import BootstrapConfig
from src.stats import (
    auto_block_length,
    ci_basic_bootstrap,
    ci_block_bootstrap,
    ci_order_statistic,
    distribution_similarity,
    iqr_outlier_fraction,
    lag1_autocorrelation,
    order_statistic_indices,
    percentile,
    zero_spread_interval,
)
from src.stats.similarity import histogram_bins


def _ar1(phi: float, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n)
    out = np.empty(n)
    out[0] = noise[0]
    for t in range(1, n):
        out[t] = phi * out[t - 1] + noise[t]
    return out


# --- percentile ---------------------------------------------------------------


def test_percentile_single_value():
    for p in (0.01, 0.25, 0.5, 0.99):
        assert percentile([10.0], p) == 10.0


def test_percentile_odd_median():
    assert percentile([1, 2, 3, 4, 5], 0.5) == 3.0


def test_percentile_linear_interpolation():
    assert percentile(list(range(1, 101)), 0.25) == pytest.approx(25.75)


def test_percentile_empty_series():
    with pytest.raises(EmptySeriesError, match="empty series"):
        percentile([], 0.5)


def test_percentile_rejects_out_of_range_p():
    with pytest.raises(ConfigurationError):
        percentile([1.0, 2.0], 1.5)


def test_percentile_monotone_and_permutation_invariant():
    rng = np.random.default_rng(3)
    values = rng.lognormal(0.0, 0.5, 200)
    shuffled = rng.permutation(values)
    grid = [0.1, 0.25, 0.5, 0.75, 0.9]
    results = [percentile(values, p) for p in grid]
    assert results == sorted(results)
    assert results == [percentile(shuffled, p) for p in grid]


# --- order statistic -------------------------------------------------------------


def test_order_statistic_indices_for_median_of_100():
    assert order_statistic_indices(100, 0.5, 0.95) == (40, 60)


def test_order_statistic_bounds_are_series_elements():
    values = np.arange(1.0, 101.0)
    ci = ci_order_statistic(values[::-1], 0.5, 0.95)
    assert ci.computable
    assert (ci.lower, ci.upper) == (40.0, 60.0)
    assert ci.lower <= percentile(values, 0.5) <= ci.upper


def test_order_statistic_not_computable_at_small_n():
    ci = ci_order_statistic(np.arange(1.0, 11.0), 0.25, 0.95)
    assert not ci.computable
    assert ci.lower is None and ci.upper is None


def test_order_statistic_constant_series():
    ci = ci_order_statistic([7.0] * 100, 0.5, 0.95)
    assert ci.computable
    assert (ci.lower, ci.upper) == (7.0, 7.0)


def test_order_statistic_rejects_bad_level():
    with pytest.raises(ConfigurationError) as excinfo:
        ci_order_statistic([1.0, 2.0, 3.0], 0.5, 1.0)
    assert excinfo.value.field == "level"


# --- bootstrap -------------------------------------------------------------------


def test_basic_bootstrap_constant_series():
    ci = ci_basic_bootstrap([5.0] * 50, 0.9, 0.95, BootstrapConfig(seed=1))
    assert (ci.lower, ci.upper) == (5.0, 5.0)


def test_basic_bootstrap_is_deterministic():
    values = list(range(1, 21))
    cfg = BootstrapConfig(seed=42, resamples=1000)
    first = ci_basic_bootstrap(values, 0.5, 0.95, cfg)
    second = ci_basic_bootstrap(values, 0.5, 0.95, cfg)
    assert first == second
    assert first.lower <= 10.5 <= first.upper


def test_basic_bootstrap_independent_of_worker_count():
    values = np.random.default_rng(9).lognormal(0.0, 0.3, 80)
    serial = ci_basic_bootstrap(values, 0.75, 0.95, BootstrapConfig(seed=5, resamples=750))
    threaded = ci_basic_bootstrap(values, 0.75, 0.95, BootstrapConfig(seed=5, resamples=750, workers=4))
    assert serial == threaded


def test_basic_bootstrap_seed_changes_interval():
    values = np.random.default_rng(11).lognormal(0.0, 0.5, 60)
    a = ci_basic_bootstrap(values, 0.5, 0.95, BootstrapConfig(seed=1))
    b = ci_basic_bootstrap(values, 0.5, 0.95, BootstrapConfig(seed=2))
    assert (a.lower, a.upper) != (b.lower, b.upper)


def test_basic_bootstrap_median_of_one_to_twenty():
    cfg = BootstrapConfig(seed=42, resamples=1000)
    ci = ci_basic_bootstrap(list(range(1, 21)), 0.5, 0.95, cfg)
    # Medians of 20 integers are whole or half numbers.
    assert (2 * ci.lower).is_integer() and (2 * ci.upper).is_integer()
    assert 5.0 <= ci.lower <= 10.5 <= ci.upper <= 16.0
    assert ci == ci_basic_bootstrap(np.arange(1.0, 21.0), 0.5, 0.95, cfg.model_copy(update={"workers": 3}))


@pytest.mark.slow
def test_basic_bootstrap_median_coverage():
    rng = np.random.default_rng(17)
    trials = 1000
    covered = 0
    for trial in range(trials):
        ci = ci_basic_bootstrap(rng.lognormal(0.0, 0.5, 200), 0.5, 0.95, BootstrapConfig(seed=trial))
        covered += ci.lower <= 1.0 <= ci.upper
    assert 0.92 <= covered / trials <= 0.98


@pytest.mark.slow
def test_block_bootstrap_covers_dependent_medians_better():
    trials = 300
    basic = block = 0
    for trial in range(trials):
        # exp of a zero-median AR(1) process; the true median is 1.
        values = np.exp(_ar1(0.8, 200, seed=trial))
        cfg = BootstrapConfig(seed=trial, resamples=500)
        a = ci_basic_bootstrap(values, 0.5, 0.95, cfg)
        b = ci_block_bootstrap(values, 0.5, 0.95, cfg)
        basic += a.lower <= 1.0 <= a.upper
        block += b.lower <= 1.0 <= b.upper
    assert block >= basic


def test_bootstrap_empty_series():
    with pytest.raises(EmptySeriesError):
        ci_basic_bootstrap([], 0.5, 0.95, BootstrapConfig())


def test_block_bootstrap_with_unit_blocks_matches_basic():
    values = np.random.default_rng(21).lognormal(0.0, 0.4, 64)
    basic = ci_basic_bootstrap(values, 0.5, 0.95, BootstrapConfig(seed=8))
    block = ci_block_bootstrap(values, 0.5, 0.95, BootstrapConfig(seed=8, block_length=1))
    assert basic == block


def test_block_bootstrap_constant_series():
    ci = ci_block_bootstrap([3.0] * 40, 0.25, 0.95, BootstrapConfig(seed=4))
    assert (ci.lower, ci.upper) == (3.0, 3.0)


def test_block_bootstrap_too_short():
    with pytest.raises(SeriesTooShortError, match="series too short for block selection"):
        ci_block_bootstrap([1.0, 2.0, 3.0], 0.5, 0.95, BootstrapConfig())


def test_auto_block_length_white_noise_is_short():
    noise = np.random.default_rng(7).standard_normal(500)
    assert 1 <= auto_block_length(noise) <= math.ceil(500 ** (1 / 3)) + 2


def test_auto_block_length_grows_with_dependence():
    noise = np.random.default_rng(7).standard_normal(500)
    dependent = _ar1(0.9, 500, seed=7)
    assert auto_block_length(dependent) > auto_block_length(noise)
    assert auto_block_length(dependent) <= 250


def test_auto_block_length_constant_and_short():
    assert auto_block_length([2.0] * 10) == 1
    with pytest.raises(SeriesTooShortError):
        auto_block_length([1.0, 2.0, 3.0])


def test_lag1_autocorrelation():
    assert lag1_autocorrelation([4.0] * 20) == 0.0
    assert lag1_autocorrelation(_ar1(0.9, 2000, seed=1)) == pytest.approx(0.9, abs=0.05)


def test_zero_spread_interval():
    assert zero_spread_interval([1.0, 2.0], 0.5, 0.95) is None
    exact = zero_spread_interval([6.0, 6.0], 0.25, 0.95)
    assert exact is not None and (exact.lower, exact.upper) == (6.0, 6.0)


# --- similarity ------------------------------------------------------------------


def test_similarity_identical_series():
    values = np.random.default_rng(2).lognormal(0.0, 0.25, 300)
    assert distribution_similarity(values, values) == 100.0
    assert distribution_similarity(values, values[::-1]) == 100.0


def test_similarity_disjoint_supports():
    assert distribution_similarity(range(1, 11), range(1000, 1011)) == 0.0


def test_similarity_same_law():
    a = np.random.default_rng(101).lognormal(0.0, 0.25, 500)
    b = np.random.default_rng(202).lognormal(0.0, 0.25, 500)
    assert distribution_similarity(a, b) >= 85.0


def test_similarity_symmetric_and_bounded():
    a = np.random.default_rng(5).lognormal(0.0, 0.3, 120)
    b = np.random.default_rng(6).gamma(4.0, 0.3, 77)
    forward = distribution_similarity(a, b)
    assert forward == distribution_similarity(b, a)
    assert 0.0 <= forward <= 100.0


def test_similarity_constant_inputs():
    assert distribution_similarity([4.0, 4.0], [4.0]) == 100.0


def test_similarity_empty_input():
    with pytest.raises(EmptySeriesError):
        distribution_similarity([], [1.0])


def test_histogram_bins_clamped():
    assert histogram_bins(4, 9) == 10
    assert histogram_bins(1000, 10) == 32
    assert histogram_bins(50_000, 1) == 100


# --- outliers ----------------------------------------------------------------------


def test_iqr_outlier_fraction():
    assert iqr_outlier_fraction([5.0] * 30) == 0.0
    assert iqr_outlier_fraction([1, 2, 3, 4, 5, 6, 7, 8, 9, 1000]) == pytest.approx(0.1)
    assert iqr_outlier_fraction(list(range(1, 101))) == 0.0


def test_iqr_outlier_fraction_shift_invariant():
    values = np.random.default_rng(12).lognormal(0.0, 0.8, 400)
    assert iqr_outlier_fraction(values) == iqr_outlier_fraction(values + 250.0)
