"""Distribution-stability baseline: stop once successive snapshots look alike."""

import numpy as np

from src.schema import Pt4CloudConfig, SimilarityStep, StopDecision, Verdict
from src.stats import as_array, distribution_similarity
from src.stats.percentiles import SampleSeries


def pt4cloud_step(
    accumulated: SampleSeries, previous_snapshot: SampleSeries, cfg: Pt4CloudConfig
) -> SimilarityStep:
    """Stop iff similarity(previous snapshot, accumulated) / 100 >= p0."""
    similarity = distribution_similarity(previous_snapshot, accumulated)
    verdict = Verdict.STOP if similarity / 100.0 >= cfg.objective_probability else Verdict.CONTINUE
    return SimilarityStep(verdict=verdict, similarity=similarity)


class Pt4CloudCriterion:
    """Compares the accumulated set before and after the newest run interval."""

    name = "pt4cloud"

    def __init__(self, cfg: Pt4CloudConfig):
        self.cfg = cfg
        self.run_interval = cfg.run_interval
        self.max_samples = cfg.max_samples

    def evaluate(self, series: np.ndarray) -> StopDecision:
        values = as_array(series)
        cut = values.size - self.run_interval
        if cut <= 0:
            return StopDecision(verdict=Verdict.CONTINUE, samples_used=values.size, technique=self.name)
        step = pt4cloud_step(values, values[:cut], self.cfg)
        return StopDecision(
            verdict=step.verdict,
            samples_used=values.size,
            technique=self.name,
            metric_name="similarity",
            metric=step.similarity,
        )
