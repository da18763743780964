"""Histogram-overlap similarity between two latency distributions."""

import math

import numpy as np

from src.stats.percentiles import SampleSeries, as_array

MIN_BINS = 10
MAX_BINS = 100


def histogram_bins(size_a: int, size_b: int) -> int:
    """ceil(sqrt(max(|a|, |b|))) clamped to [10, 100]."""
    return min(max(math.ceil(math.sqrt(max(size_a, size_b))), MIN_BINS), MAX_BINS)


def distribution_similarity(a: SampleSeries, b: SampleSeries) -> float:
    """Percentage overlap (0-100) of the two normalised histograms on a shared grid.

    Overlap is accumulated in integer counts (min(c_a * n_b, c_b * n_a)) so the
    result is exactly symmetric and exactly 100 for identical multisets.
    """
    x = as_array(a)
    y = as_array(b)
    low = min(x.min(), y.min())
    high = max(x.max(), y.max())
    if low == high:
        return 100.0
    edges = np.linspace(low, high, histogram_bins(x.size, y.size) + 1)
    counts_a, _ = np.histogram(x, bins=edges)
    counts_b, _ = np.histogram(y, bins=edges)
    n_a, n_b = x.size, y.size
    shared = np.minimum(counts_a.astype(np.int64) * n_b, counts_b.astype(np.int64) * n_a)
    return 100.0 * int(shared.sum()) / (n_a * n_b)
