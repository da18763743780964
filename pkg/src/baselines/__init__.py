"""Comparison techniques sharing the session-driver interface."""

from .confirm import ConfirmCriterion, confirm_step
from .fixed import FixedCriterion
from .metior import MetiorCriterion, metior_step
from .pt4cloud import Pt4CloudCriterion, pt4cloud_step

__all__ = [
    "ConfirmCriterion",
    "FixedCriterion",
    "MetiorCriterion",
    "Pt4CloudCriterion",
    "confirm_step",
    "metior_step",
    "pt4cloud_step",
]
