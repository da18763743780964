"""Synthetic workload generators."""

from .presets import desk_suite, list_presets, preset, resolve_workload
from .workload_gen import LatencyStream, as_source, generate, load_workload_spec

__all__ = [
    "LatencyStream",
    "as_source",
    "desk_suite",
    "generate",
    "list_presets",
    "load_workload_spec",
    "preset",
    "resolve_workload",
]
