"""Fixed-repetition strategy: stop after N samples, whatever they look like."""

import numpy as np

from src.schema import StopDecision, Verdict


class FixedCriterion:
    def __init__(self, repetitions: int):
        if repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        self.repetitions = repetitions
        self.name = f"fixed:{repetitions}"
        # One batch of N; the cap never binds before the criterion does.
        self.run_interval = repetitions
        self.max_samples = repetitions

    def evaluate(self, series: np.ndarray) -> StopDecision:
        verdict = Verdict.STOP if len(series) >= self.repetitions else Verdict.CONTINUE
        return StopDecision(verdict=verdict, samples_used=len(series), technique=self.name)
