"""Percentile estimation and simple distribution summaries."""

from typing import Optional, Sequence, Union

import numpy as np

from src.errors import ConfigurationError, EmptySeriesError
from src.schema import ConfidenceInterval

SampleSeries = Union[Sequence[float], np.ndarray]

IQR_FENCE = 1.5


def as_array(series: SampleSeries) -> np.ndarray:
    """Return the series as a 1-D float64 array, preserving order.

    Raises:
        EmptySeriesError: if the series has no samples
        ValueError: if any value is NaN or infinite
    """
    values = np.asarray(series, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptySeriesError()
    if not np.all(np.isfinite(values)):
        raise ValueError("latencies must be finite")
    return values


def check_fraction(name: str, value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ConfigurationError(name, f"must lie strictly between 0 and 1, got {value}")
    return float(value)


def percentile(series: SampleSeries, p: float) -> float:
    """Linear-interpolation percentile.

    With sorted values v[1..n], rank h = (n - 1) * p + 1 and the result
    interpolates between v[floor(h)] and v[floor(h) + 1].
    """
    values = as_array(series)
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError("p", f"must lie in [0, 1], got {p}")
    return float(np.quantile(values, p))


def iqr_outlier_fraction(series: SampleSeries) -> float:
    """Share of samples outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]."""
    values = as_array(series)
    q1, q3 = np.quantile(values, [0.25, 0.75])
    spread = q3 - q1
    low, high = q1 - IQR_FENCE * spread, q3 + IQR_FENCE * spread
    outside = np.count_nonzero((values < low) | (values > high))
    return outside / values.size


def zero_spread_interval(series: SampleSeries, p: float, level: float) -> Optional[ConfidenceInterval]:
    """Exact interval [c, c] for a constant series, else None.

    Every order statistic and every resample of a constant series equals c,
    so the interval holds for each method at any sample size.
    """
    values = as_array(series)
    if values.min() != values.max():
        return None
    constant = float(values[0])
    return ConfidenceInterval.bounded(p, level, constant, constant)


def lag1_autocorrelation(series: SampleSeries) -> float:
    """Sample lag-1 autocorrelation; 0.0 for series with no variance."""
    values = as_array(series)
    if values.size < 2:
        return 0.0
    centered = values - values.mean()
    denominator = float(np.dot(centered, centered))
    if denominator == 0.0:
        return 0.0
    return float(np.dot(centered[:-1], centered[1:]) / denominator)
