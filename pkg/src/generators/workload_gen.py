"""Synthetic latency streams standing in for a real function-under-test."""

import logging
from abc import ABC, abstractmethod
from typing import Any, List, Mapping, Optional, Union

import numpy as np
from pydantic import ValidationError
from scipy.signal import lfilter

from src.errors import ConfigurationError
from src.schema import (
    AR1LognormalModel,
    BimodalMixtureModel,
    ColdWarmMixModel,
    CompositeModel,
    GammaModel,
    LognormalModel,
    WorkloadSpec,
)

logger = logging.getLogger(__name__)

# Samplers are always asked for whole chunks, so the realised sequence is
# independent of how callers batch their reads.
STREAM_CHUNK = 256
MIN_LATENCY_MS = 1e-9


def _generator(seed_sequence: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence))


class _Sampler(ABC):
    @abstractmethod
    def draw(self, size: int) -> np.ndarray:
        """Next `size` latencies of this component, in invocation order."""


class _LognormalSampler(_Sampler):
    def __init__(self, model: LognormalModel, seed_sequence: np.random.SeedSequence):
        self.model = model
        self.rng = _generator(seed_sequence)

    def draw(self, size: int) -> np.ndarray:
        return self.rng.lognormal(self.model.mu, self.model.sigma, size)


class _GammaSampler(_Sampler):
    def __init__(self, model: GammaModel, seed_sequence: np.random.SeedSequence):
        self.model = model
        self.rng = _generator(seed_sequence)

    def draw(self, size: int) -> np.ndarray:
        return self.rng.gamma(self.model.shape, self.model.scale, size)


class _AR1LognormalSampler(_Sampler):
    """exp(mu + y_t) with y_t = phi * y_{t-1} + e_t, started in its stationary law."""

    def __init__(self, model: AR1LognormalModel, seed_sequence: np.random.SeedSequence):
        self.model = model
        self.rng = _generator(seed_sequence)
        self._last: Optional[float] = None

    def draw(self, size: int) -> np.ndarray:
        phi, sigma = self.model.phi, self.model.sigma
        innovations = self.rng.standard_normal(size) * sigma * np.sqrt(1.0 - phi**2)
        if self._last is None:
            innovations[0] = innovations[0] / np.sqrt(1.0 - phi**2)
            log_process = lfilter([1.0], [1.0, -phi], innovations)
        else:
            log_process, _ = lfilter([1.0], [1.0, -phi], innovations, zi=[phi * self._last])
        self._last = float(log_process[-1])
        return np.exp(self.model.mu + log_process)


class _ChoiceSampler(_Sampler):
    """Takes `first` with probability `probability`, else `second`."""

    def __init__(
        self,
        first: _Sampler,
        second: _Sampler,
        probability: float,
        seed_sequence: np.random.SeedSequence,
    ):
        self.first = first
        self.second = second
        self.probability = probability
        self.rng = _generator(seed_sequence)

    def draw(self, size: int) -> np.ndarray:
        pick_first = self.rng.random(size) < self.probability
        return np.where(pick_first, self.first.draw(size), self.second.draw(size))


class _SumSampler(_Sampler):
    def __init__(self, components: List[_Sampler]):
        self.components = components

    def draw(self, size: int) -> np.ndarray:
        return np.sum([component.draw(size) for component in self.components], axis=0)


def _build_sampler(model: Any, seed_sequence: np.random.SeedSequence) -> _Sampler:
    if isinstance(model, LognormalModel):
        return _LognormalSampler(model, seed_sequence)
    if isinstance(model, GammaModel):
        return _GammaSampler(model, seed_sequence)
    if isinstance(model, AR1LognormalModel):
        return _AR1LognormalSampler(model, seed_sequence)
    if isinstance(model, BimodalMixtureModel):
        child_a, child_b = seed_sequence.spawn(2)
        return _ChoiceSampler(
            _build_sampler(model.component_b, child_b),
            _build_sampler(model.component_a, child_a),
            model.weight,
            seed_sequence,
        )
    if isinstance(model, ColdWarmMixModel):
        child_cold, child_warm = seed_sequence.spawn(2)
        return _ChoiceSampler(
            _build_sampler(model.cold_spec, child_cold),
            _build_sampler(model.warm_spec, child_warm),
            model.cold_probability,
            seed_sequence,
        )
    if isinstance(model, CompositeModel):
        children = seed_sequence.spawn(len(model.components))
        return _SumSampler([_build_sampler(m, s) for m, s in zip(model.components, children)])
    raise ConfigurationError("model", f"unsupported latency model {type(model).__name__}")


def load_workload_spec(spec: Union[WorkloadSpec, Mapping[str, Any]]) -> WorkloadSpec:
    """Validate a workload description, naming the offending field on failure."""
    if isinstance(spec, WorkloadSpec):
        return spec
    try:
        return WorkloadSpec.model_validate(spec)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "workload"
        raise ConfigurationError(field, error["msg"]) from exc


class LatencyStream:
    """On-demand latency source for one workload.

    Consecutive reads continue the same random stream, so two batches of 5
    equal one read of 10.
    """

    def __init__(self, spec: Union[WorkloadSpec, Mapping[str, Any]]):
        self.spec = load_workload_spec(spec)
        self._sampler = _build_sampler(self.spec.model, np.random.SeedSequence(self.spec.seed))
        self._buffer = np.empty(0, dtype=np.float64)
        self.drawn = 0

    def take(self, n: int) -> np.ndarray:
        while self._buffer.size < n:
            chunk = np.maximum(self._sampler.draw(STREAM_CHUNK), MIN_LATENCY_MS)
            self._buffer = np.concatenate([self._buffer, chunk])
        values, self._buffer = self._buffer[:n], self._buffer[n:]
        self.drawn += n
        return values

    def next_batch(self, size: int) -> List[float]:
        return self.take(size).tolist()


def generate(spec: Union[WorkloadSpec, Mapping[str, Any]], n: int) -> np.ndarray:
    """`n` latencies (ms) for the workload, deterministic per (spec, n)."""
    if n < 1:
        raise ConfigurationError("n", f"must be at least 1, got {n}")
    stream = LatencyStream(spec)
    logger.debug("generating %d samples for %s (seed=%d)", n, stream.spec.name, stream.spec.seed)
    return stream.take(n)


def as_source(spec: Union[WorkloadSpec, Mapping[str, Any]]) -> LatencyStream:
    return LatencyStream(spec)
