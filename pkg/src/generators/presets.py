"""Named workload presets and the desk-scale evaluation suite."""

import math
from typing import Dict, List

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

# Warm starts: low location, tight spread. SCOPE-1 at r=1% stops after roughly
# 500-650 runs.
WARM = LognormalModel(mu=math.log(120.0), sigma=0.075)

# Cold starts: higher location with a heavier right tail from slow instance launches.
COLD = BimodalMixtureModel(
    component_a=LognormalModel(mu=math.log(850.0), sigma=0.06),
    component_b=LognormalModel(mu=math.log(1500.0), sigma=0.25),
    weight=0.05,
)

PRESETS: Dict[str, object] = {
    "warm": WARM,
    "cold": COLD,
    "mixed": ColdWarmMixModel(cold_spec=COLD, warm_spec=WARM, cold_probability=0.2),
    # Burst invocations: a concurrency-spike component on top of warm behaviour.
    "bursty": BimodalMixtureModel(
        component_a=WARM,
        component_b=LognormalModel(mu=math.log(400.0), sigma=0.3),
        weight=0.1,
    ),
    "ar1": AR1LognormalModel(mu=math.log(200.0), sigma=0.08, phi=0.8),
    "composite": CompositeModel(
        components=[
            LognormalModel(mu=math.log(40.0), sigma=0.08),
            GammaModel(shape=60.0, scale=1.5),
            LognormalModel(mu=math.log(25.0), sigma=0.12),
        ]
    ),
    "bimodal-wide": BimodalMixtureModel(
        component_a=LognormalModel(mu=math.log(100.0), sigma=0.3),
        component_b=LognormalModel(mu=math.log(600.0), sigma=0.4),
        weight=0.4,
    ),
}


def list_presets() -> List[str]:
    return sorted(PRESETS)


def preset(name: str, seed: int = 0) -> WorkloadSpec:
    try:
        model = PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            "preset", f"unknown preset {name!r}; choose from {', '.join(list_presets())}"
        ) from None
    return WorkloadSpec(name=name, model=model, seed=seed)  # type: ignore[arg-type]


def desk_suite(per_family: int = 10) -> List[WorkloadSpec]:
    """Warm-like, cold-like heavy-tail and AR(1) (phi=0.8) workloads, `per_family` each.

    Locations and spreads step deterministically across each family. Stop
    sizes under SCOPE-1 grow with the square of the log spread: the warm and
    cold spreads land around 300 runs and the AR(1) spreads around 750.
    """
    workloads: List[WorkloadSpec] = []
    for i in range(per_family):
        workloads.append(
            WorkloadSpec(
                name=f"warm-{i:02d}",
                model=LognormalModel(mu=math.log(80.0 + 20.0 * i), sigma=0.050 + 0.001 * i),
            )
        )
    for i in range(per_family):
        body = 600.0 + 50.0 * i
        workloads.append(
            WorkloadSpec(
                name=f"cold-{i:02d}",
                model=BimodalMixtureModel(
                    component_a=LognormalModel(mu=math.log(body), sigma=0.044 + 0.001 * i),
                    component_b=LognormalModel(mu=math.log(1.8 * body), sigma=0.25),
                    weight=0.04,
                ),
            )
        )
    for i in range(per_family):
        workloads.append(
            WorkloadSpec(
                name=f"ar1-{i:02d}",
                model=AR1LognormalModel(mu=math.log(150.0 + 10.0 * i), sigma=0.078 + 0.001 * i, phi=0.8),
            )
        )
    return workloads


def resolve_workload(name: str, seed: int = 0) -> List[WorkloadSpec]:
    """A preset name, or `desk` for the full desk-scale suite."""
    if name == "desk":
        return [spec.with_seed(seed) for spec in desk_suite()]
    return [preset(name, seed)]
