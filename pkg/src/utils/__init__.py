"""I/O, configuration and seeding helpers."""

from .config_loader import load_experiment_config, load_settings, resolve_run_config
from .ingest import FileSource, parse_samples, write_samples
from .invoker import ExternalCommandSource, invoke_external
from .reports import emit_report, ensure_writable, parse_report, write_report
from .seeding import derive_seed, experiment_seeds, fresh_seed

__all__ = [
    "ExternalCommandSource",
    "FileSource",
    "derive_seed",
    "emit_report",
    "ensure_writable",
    "experiment_seeds",
    "fresh_seed",
    "invoke_external",
    "load_experiment_config",
    "load_settings",
    "parse_report",
    "parse_samples",
    "resolve_run_config",
    "write_report",
    "write_samples",
]
