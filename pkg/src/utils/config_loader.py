"""Layered configuration: defaults < environment < JSON experiment file < flags."""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from src.errors import ConfigurationError
from src.generators import load_workload_spec, resolve_workload
from src.schema import RunConfig, WorkloadSpec

logger = logging.getLogger(__name__)

BASELINE_SECTIONS = ("pt4cloud", "metior", "confirm")
CRITERION_SECTIONS = ("test",) + BASELINE_SECTIONS


class Settings(BaseModel):
    """Environment defaults, read from the process environment and `.env`."""

    resamples: Optional[int] = Field(None, ge=1, description="SCOPE_RESAMPLES")
    max_samples: Optional[int] = Field(None, ge=2, description="SCOPE_MAX_SAMPLES")
    ground_truth_size: Optional[int] = Field(None, ge=2, description="SCOPE_GROUND_TRUTH_SIZE")
    workers: Optional[int] = Field(None, ge=1, description="SCOPE_WORKERS")
    log_level: str = Field("WARNING", description="SCOPE_LOG_LEVEL")


def validation_error(exc: ValidationError, default_field: str = "config") -> ConfigurationError:
    """First pydantic error as a ConfigurationError naming the dotted field path."""
    error = exc.errors()[0]
    field = ".".join(str(part) for part in error["loc"]) or default_field
    return ConfigurationError(field, error["msg"])


def load_settings() -> Settings:
    load_dotenv()
    raw = {
        "resamples": os.getenv("SCOPE_RESAMPLES"),
        "max_samples": os.getenv("SCOPE_MAX_SAMPLES"),
        "ground_truth_size": os.getenv("SCOPE_GROUND_TRUTH_SIZE"),
        "workers": os.getenv("SCOPE_WORKERS"),
        "log_level": os.getenv("SCOPE_LOG_LEVEL"),
    }
    try:
        return Settings.model_validate({key: value for key, value in raw.items() if value not in (None, "")})
    except ValidationError as exc:
        raise validation_error(exc, "environment") from exc


def load_experiment_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON experiment file.

    Raises:
        FileNotFoundError: the file does not exist
        ConfigurationError: the file is not a JSON object
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Experiment configuration not found at {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigurationError("config", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config", f"{path} must hold a JSON object")
    return data


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; `override` wins, None values in it are ignored."""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def settings_layer(settings: Settings) -> Dict[str, Any]:
    harness: Dict[str, Any] = {section: {} for section in CRITERION_SECTIONS}
    if settings.max_samples is not None:
        for section in CRITERION_SECTIONS:
            harness[section]["max_samples"] = settings.max_samples
    if settings.resamples is not None:
        harness["test"]["bootstrap"] = {"resamples": settings.resamples}
        harness["metior"]["bootstrap"] = {"resamples": settings.resamples}
    if settings.ground_truth_size is not None:
        harness["ground_truth_size"] = settings.ground_truth_size
    return {"harness": harness, "workers": settings.workers}


def file_layer(data: Mapping[str, Any]) -> Dict[str, Any]:
    """Map the experiment-file layout onto RunConfig's layout."""
    harness: Dict[str, Any] = dict(data.get("harness") or {})
    if "test" in data:
        harness["test"] = data["test"]
    for name, section in (data.get("baselines") or {}).items():
        if name not in BASELINE_SECTIONS:
            raise ConfigurationError(f"baselines.{name}", f"unknown baseline; choose from {', '.join(BASELINE_SECTIONS)}")
        harness[name] = section
    sweep = data.get("sweep") or {}
    layer: Dict[str, Any] = {
        "harness": harness,
        "workloads": data.get("workloads"),
        "techniques": data.get("techniques"),
        "seeds": data.get("seeds"),
        "sweep_parameter": sweep.get("parameter"),
        "sweep_values": sweep.get("values"),
    }
    for key in ("seed", "technique", "source", "workers", "format", "output", "count"):
        layer[key] = data.get(key)
    return layer


def resolve_workloads(entries: List[Union[str, Mapping[str, Any], WorkloadSpec]]) -> List[WorkloadSpec]:
    """Preset names (or `desk`) and inline WorkloadSpec objects, in order."""
    workloads: List[WorkloadSpec] = []
    for entry in entries:
        if isinstance(entry, str):
            workloads.extend(resolve_workload(entry))
        else:
            workloads.append(load_workload_spec(entry))
    return workloads


def resolve_run_config(
    command: str,
    seed: int,
    file_data: Optional[Mapping[str, Any]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> RunConfig:
    """Merge every layer and validate the result."""
    settings = settings if settings is not None else load_settings()
    merged = deep_merge({"command": command, "seed": seed}, settings_layer(settings))
    if file_data:
        merged = deep_merge(merged, file_layer(file_data))
    if flags:
        merged = deep_merge(merged, flags)
    merged["command"] = command
    merged.setdefault("seeds", [merged["seed"]])
    if merged.get("workloads"):
        merged["workloads"] = resolve_workloads(merged["workloads"])

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as exc:
        raise validation_error(exc) from exc
