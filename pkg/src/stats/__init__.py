"""Statistical kernels: percentiles, confidence intervals, similarity."""

from .intervals import (
    auto_block_length,
    ci_basic_bootstrap,
    ci_block_bootstrap,
    ci_order_statistic,
    order_statistic_indices,
)
from .percentiles import (
    as_array,
    iqr_outlier_fraction,
    lag1_autocorrelation,
    percentile,
    zero_spread_interval,
)
from .similarity import distribution_similarity

__all__ = [
    "as_array",
    "auto_block_length",
    "ci_basic_bootstrap",
    "ci_block_bootstrap",
    "ci_order_statistic",
    "distribution_similarity",
    "iqr_outlier_fraction",
    "lag1_autocorrelation",
    "order_statistic_indices",
    "percentile",
    "zero_spread_interval",
]
