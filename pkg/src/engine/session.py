"""Session driver: collect a run interval, evaluate, repeat."""

import logging
from typing import List, Optional, Protocol, Sequence, Union

import numpy as np

from src.engine.criterion import ScopeCriterion
from src.errors import SessionTerminatedError, SourceError
from src.schema import SessionResult, StopDecision, Termination, TestConfig, Verdict

logger = logging.getLogger(__name__)


class SampleSource(Protocol):
    """Anything that yields latency batches on demand.

    A batch shorter than requested (or empty) means the source is exhausted.
    """

    def next_batch(self, size: int) -> Sequence[float]:
        ...


class StoppingCriterion(Protocol):
    name: str
    run_interval: int
    max_samples: int

    def evaluate(self, series: np.ndarray) -> StopDecision:
        ...


class ListSource:
    """Serves a pre-collected series in order."""

    def __init__(self, values: Sequence[float]):
        self._values = [float(v) for v in values]
        self._position = 0

    def next_batch(self, size: int) -> List[float]:
        batch = self._values[self._position : self._position + size]
        self._position += len(batch)
        return batch


def _validate_batch(new_samples: Sequence[float]) -> List[float]:
    batch = [float(v) for v in new_samples]
    for value in batch:
        if not np.isfinite(value) or value <= 0.0:
            raise ValueError(f"latencies must be positive and finite, got {value}")
    return batch


class TestSession:
    """Single-owner state machine for one performance test.

    Not safe for concurrent mutation; may be handed between threads between steps.
    """

    __test__ = False

    def __init__(self, criterion: Union[StoppingCriterion, TestConfig]):
        if isinstance(criterion, TestConfig):
            criterion = ScopeCriterion(criterion)
        self.criterion = criterion
        self._values: List[float] = []
        self.trace: List[StopDecision] = []
        self.terminated_by: Optional[Termination] = None

    @property
    def samples_used(self) -> int:
        return len(self._values)

    @property
    def terminated(self) -> bool:
        return self.terminated_by is not None

    def step(self, new_samples: Sequence[float]) -> StopDecision:
        """Append data_new to S_cur and run the criterion."""
        if self.terminated:
            raise SessionTerminatedError()
        batch = _validate_batch(new_samples)
        if len(batch) > self.criterion.run_interval:
            raise ValueError(
                f"batch of {len(batch)} exceeds run_interval {self.criterion.run_interval}"
            )
        self._values.extend(batch)
        decision = self.criterion.evaluate(np.asarray(self._values))
        if decision.verdict == Verdict.CONTINUE and self.samples_used >= self.criterion.max_samples:
            decision = decision.model_copy(update={"verdict": Verdict.CAP_REACHED})
        self.trace.append(decision)

        if decision.verdict == Verdict.STOP:
            self.terminated_by = Termination.CRITERION
        elif decision.verdict == Verdict.CAP_REACHED:
            self.terminated_by = Termination.CAP
        return decision

    def mark_exhausted(self) -> None:
        self.terminated_by = Termination.SOURCE_EXHAUSTED

    def result(self) -> SessionResult:
        return SessionResult(
            technique=self.criterion.name,
            stop_location=self.samples_used,
            final_series=list(self._values),
            decision_trace=list(self.trace),
            terminated_by=self.terminated_by or Termination.SOURCE_EXHAUSTED,
        )


def run_session(
    source: SampleSource, criterion: Union[StoppingCriterion, TestConfig]
) -> SessionResult:
    """Drive a session until Stop, the sample cap, or source exhaustion.

    A short final batch is still appended and evaluated, but the session is
    then reported as SourceExhausted.
    """
    session = TestSession(criterion)
    k = session.criterion.run_interval
    while not session.terminated:
        try:
            batch = list(source.next_batch(k))
        except Exception as exc:
            raise SourceError(f"sample source failed: {exc}", partial=session.result()) from exc
        if not batch:
            session.mark_exhausted()
            break
        session.step(batch)
        if len(batch) < k:
            session.mark_exhausted()

    result = session.result()
    logger.info(
        "%s finished at %d samples (%s)",
        result.technique,
        result.stop_location,
        result.terminated_by.value,
    )
    return result
