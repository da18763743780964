"""Stopping engine."""

from .criterion import (
    ScopeCriterion,
    accuracy_check,
    compute_interval,
    consistency_check,
    desired_ci_exists,
)
from .session import ListSource, SampleSource, StoppingCriterion, TestSession, run_session

__all__ = [
    "ListSource",
    "SampleSource",
    "ScopeCriterion",
    "StoppingCriterion",
    "TestSession",
    "accuracy_check",
    "compute_interval",
    "consistency_check",
    "desired_ci_exists",
    "run_session",
]
