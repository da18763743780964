"""Non-parametric confidence intervals for percentiles.

Three backends are provided:

* ``ci_order_statistic`` - distribution-free interval from two sorted-sample
  indices (normal approximation to the binomial).
* ``ci_basic_bootstrap`` - percentile bootstrap, resampling with replacement.
* ``ci_block_bootstrap`` - circular block bootstrap for dependent series.

Bootstrap resamples are drawn in fixed-size chunks; chunk ``j`` uses its own
PCG64 stream seeded from ``SeedSequence([seed, j])``, so the interval does
not depend on how many worker threads evaluate the chunks.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple

import numpy as np
from scipy.stats import norm

from src.errors import SeriesTooShortError
from src.schema import BootstrapConfig, ConfidenceInterval
from src.stats.percentiles import SampleSeries, as_array, check_fraction, lag1_autocorrelation

logger = logging.getLogger(__name__)

RESAMPLE_CHUNK = 100
MIN_BLOCK_SERIES = 4
MAX_DEPENDENCE = 0.99

# Rounding applied before floor/ceil so that e.g. 39.99999999997 is treated as 40.
_INDEX_DECIMALS = 9

IndexDraw = Callable[[np.random.Generator, int], np.ndarray]


def _floor(x: float) -> int:
    return math.floor(round(x, _INDEX_DECIMALS))


def _ceil(x: float) -> int:
    return math.ceil(round(x, _INDEX_DECIMALS))


def z_quantile(level: float) -> float:
    """Standard-normal quantile at (1 + level) / 2."""
    return float(norm.ppf((1.0 + level) / 2.0))


def order_statistic_indices(n: int, p: float, level: float) -> Tuple[int, int]:
    """1-based indices (l, u) of the order-statistic interval; may fall outside [1, n]."""
    spread = z_quantile(level) * math.sqrt(n * p * (1.0 - p))
    return _floor(n * p - spread), _ceil(n * p + spread)


def ci_order_statistic(series: SampleSeries, p: float, level: float) -> ConfidenceInterval:
    values = np.sort(as_array(series))
    check_fraction("p", p)
    check_fraction("level", level)
    n = values.size
    lower, upper = order_statistic_indices(n, p, level)
    if 1 <= lower < upper <= n:
        return ConfidenceInterval.bounded(p, level, values[lower - 1], values[upper - 1])
    return ConfidenceInterval.not_computable(p, level)


def _chunk_sizes(resamples: int) -> List[int]:
    full, rest = divmod(resamples, RESAMPLE_CHUNK)
    return [RESAMPLE_CHUNK] * full + ([rest] if rest else [])


def _resample_percentiles(
    values: np.ndarray, p: float, cfg: BootstrapConfig, draw: IndexDraw
) -> np.ndarray:
    sizes = _chunk_sizes(cfg.resamples)

    def run_chunk(job: Tuple[int, int]) -> np.ndarray:
        index, size = job
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, index])))
        return np.quantile(values[draw(rng, size)], p, axis=1)

    jobs = list(enumerate(sizes))
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(run_chunk, jobs))
    else:
        chunks = [run_chunk(job) for job in jobs]
    return np.concatenate(chunks)


def _percentile_interval(statistics: np.ndarray, p: float, level: float) -> ConfidenceInterval:
    ordered = np.sort(statistics)
    c = ordered.size
    low_rank = min(max(_floor(c * (1.0 - level) / 2.0) + 1, 1), c)
    high_rank = min(max(_ceil(c * (1.0 + level) / 2.0), 1), c)
    return ConfidenceInterval.bounded(p, level, ordered[low_rank - 1], ordered[high_rank - 1])


def ci_basic_bootstrap(
    series: SampleSeries, p: float, level: float, cfg: BootstrapConfig
) -> ConfidenceInterval:
    values = as_array(series)
    check_fraction("p", p)
    check_fraction("level", level)
    n = values.size

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.integers(0, n, size=(size, n))

    return _percentile_interval(_resample_percentiles(values, p, cfg, draw), p, level)


def auto_block_length(series: SampleSeries) -> int:
    """Block length grown with lag-1 dependence.

    b = ceil(n^(1/3) * (1 + 2|rho| / (1 - |rho|))), clamped to [1, n // 2];
    constant series return 1.
    """
    values = as_array(series)
    n = values.size
    if n < MIN_BLOCK_SERIES:
        raise SeriesTooShortError()
    if values.min() == values.max():
        return 1
    rho = min(abs(lag1_autocorrelation(values)), MAX_DEPENDENCE)
    length = _ceil(n ** (1.0 / 3.0) * (1.0 + 2.0 * rho / (1.0 - rho)))
    return int(min(max(length, 1), n // 2))


def ci_block_bootstrap(
    series: SampleSeries, p: float, level: float, cfg: BootstrapConfig
) -> ConfidenceInterval:
    values = as_array(series)
    check_fraction("p", p)
    check_fraction("level", level)
    n = values.size
    if n < MIN_BLOCK_SERIES:
        raise SeriesTooShortError()
    block = min(cfg.block_length or auto_block_length(values), n)
    blocks = math.ceil(n / block)
    offsets = np.arange(block)
    logger.debug("block bootstrap: n=%d block_length=%d", n, block)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        starts = rng.integers(0, n, size=(size, blocks))
        indices = (starts[:, :, None] + offsets) % n
        return indices.reshape(size, blocks * block)[:, :n]

    return _percentile_interval(_resample_percentiles(values, p, cfg, draw), p, level)
