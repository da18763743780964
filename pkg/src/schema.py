"""Pydantic data models for the performance tester."""

from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1

DEFAULT_CHECKED_PERCENTILES = [0.25, 0.50, 0.75]
RELIABILITY_PERCENTILES = [0.25, 0.50, 0.75, 0.90]

Fraction = Annotated[float, Field(gt=0.0, lt=1.0)]
Seed = Annotated[int, Field(ge=0, lt=2**64)]


class CIMethod(str, Enum):
    """Confidence-interval backend used by the accuracy check."""

    ORDER_STATISTIC = "order_statistic"
    BASIC_BOOTSTRAP = "basic_bootstrap"
    BLOCK_BOOTSTRAP = "block_bootstrap"


class Verdict(str, Enum):
    STOP = "stop"
    CONTINUE = "continue"
    CAP_REACHED = "cap_reached"


class Termination(str, Enum):
    CRITERION = "criterion"
    CAP = "cap"
    SOURCE_EXHAUSTED = "source_exhausted"


# --- statistics ---------------------------------------------------------------


class ConfidenceInterval(BaseModel):
    """Latency bounds for one percentile at one confidence level."""

    percentile: float = Field(..., gt=0.0, lt=1.0, description="Percentile as a fraction")
    level: float = Field(..., gt=0.0, lt=1.0, description="Confidence level as a fraction")
    lower: Optional[float] = Field(None, description="Lower bound in ms")
    upper: Optional[float] = Field(None, description="Upper bound in ms")
    computable: bool = Field(..., description="False when no interval exists at this size")

    @model_validator(mode="after")
    def _check_bounds(self) -> "ConfidenceInterval":
        if self.computable:
            if self.lower is None or self.upper is None:
                raise ValueError("a computable interval needs both bounds")
            if self.lower > self.upper:
                raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        return self

    @classmethod
    def bounded(cls, percentile: float, level: float, lower: float, upper: float) -> "ConfidenceInterval":
        return cls(percentile=percentile, level=level, lower=float(lower), upper=float(upper), computable=True)

    @classmethod
    def not_computable(cls, percentile: float, level: float) -> "ConfidenceInterval":
        return cls(percentile=percentile, level=level, computable=False)

    def contains(self, value: float) -> bool:
        return self.computable and self.lower <= value <= self.upper  # type: ignore[operator]


class BootstrapConfig(BaseModel):
    """Resampling settings shared by both bootstrap interval methods."""

    resamples: int = Field(1000, ge=1, description="Number of resamples c")
    seed: Seed = Field(0, description="Root seed; chunk j draws from SeedSequence([seed, j])")
    block_length: Optional[int] = Field(None, ge=1, description="Fixed block length; None selects automatically")
    workers: int = Field(1, ge=1, description="Threads used to evaluate resample chunks")


# --- stopping engine ----------------------------------------------------------


class TailCheck(BaseModel):
    percentile: float = Field(0.95, gt=0.0, lt=1.0)
    margin: float = Field(0.03, gt=0.0, lt=1.0, description="Relaxed error margin for the tail")


class OutlierCheck(BaseModel):
    max_fraction: float = Field(0.10, ge=0.0, le=1.0, description="Largest tolerated IQR-outlier share")


class TestConfig(BaseModel):
    """Stopping-criterion parameters."""

    __test__ = False

    confidence_level: Fraction = Field(0.95, description="Confidence level cl")
    error_margin: Fraction = Field(0.01, description="Relative error margin r")
    run_interval: int = Field(5, ge=1, description="Samples collected per round (k)")
    ci_method: CIMethod = Field(CIMethod.ORDER_STATISTIC)
    checked_percentiles: List[Fraction] = Field(
        default_factory=lambda: list(DEFAULT_CHECKED_PERCENTILES), min_length=1
    )
    tail_check: Optional[TailCheck] = Field(None, description="Extra check on a tail percentile")
    outlier_check: Optional[OutlierCheck] = Field(None, description="Cap on the IQR outlier fraction")
    max_samples: int = Field(1000, ge=2, description="Safety cap on collected samples")
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)

    @model_validator(mode="after")
    def _check_cap(self) -> "TestConfig":
        if self.max_samples < 2 * self.run_interval:
            raise ValueError(
                f"max_samples ({self.max_samples}) must be at least twice run_interval ({self.run_interval})"
            )
        return self


class PercentileCheck(BaseModel):
    """Outcome of one desired-CI check."""

    percentile: float
    observed: float = Field(..., description="Empirical percentile of the checked set")
    ci: ConfidenceInterval
    margin_low: float
    margin_high: float
    dci: bool = Field(..., description="True when the CI lies inside the margin window")


class AccuracyDiagnostics(BaseModel):
    n: int = Field(..., ge=0, description="Size of the checked set")
    checks: List[PercentileCheck]
    tail: Optional[PercentileCheck] = None
    outlier_fraction: Optional[float] = None
    outlier_passed: Optional[bool] = None
    passed: bool

    @model_validator(mode="after")
    def _check_conjunction(self) -> "AccuracyDiagnostics":
        flags = [check.dci for check in self.checks]
        if self.tail is not None:
            flags.append(self.tail.dci)
        if self.outlier_passed is not None:
            flags.append(self.outlier_passed)
        if self.passed != all(flags):
            raise ValueError("passed must equal the conjunction of every enabled check")
        return self

    @property
    def dci(self) -> Dict[float, bool]:
        return {check.percentile: check.dci for check in self.checks}


class StopDecision(BaseModel):
    verdict: Verdict
    samples_used: int = Field(..., ge=0)
    technique: str = Field("scope", description="Technique that produced the decision")
    current: Optional[AccuracyDiagnostics] = Field(None, description="Accuracy check on S_cur")
    previous: Optional[AccuracyDiagnostics] = Field(None, description="Accuracy check on S_pre")
    metric_name: Optional[str] = Field(None, description="Baseline statistic, e.g. similarity")
    metric: Optional[float] = None


class SessionResult(BaseModel):
    technique: str
    stop_location: int = Field(..., ge=0)
    final_series: List[float]
    decision_trace: List[StopDecision]
    terminated_by: Termination

    @model_validator(mode="after")
    def _check_location(self) -> "SessionResult":
        if self.stop_location != len(self.final_series):
            raise ValueError("stop_location must equal the number of collected samples")
        return self

    @property
    def final_verdict(self) -> Optional[Verdict]:
        return self.decision_trace[-1].verdict if self.decision_trace else None


# --- baselines ----------------------------------------------------------------


class Pt4CloudConfig(BaseModel):
    objective_probability: Fraction = Field(0.90, description="Objective probability p0")
    run_interval: int = Field(5, ge=1)
    max_samples: int = Field(1000, ge=1)


class MetiorConfig(BaseModel):
    max_error: float = Field(0.03, ge=0.0, lt=1.0, description="Maximum relative error e0")
    confidence_level: Fraction = 0.95
    run_interval: int = Field(5, ge=1)
    max_samples: int = Field(1000, ge=1)
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)


class ConfirmConfig(BaseModel):
    max_error: float = Field(0.03, ge=0.0, lt=1.0, description="Maximum relative error e0")
    confidence_level: Fraction = 0.95
    subsample_rounds: int = Field(1000, ge=1)
    run_interval: int = Field(5, ge=1)
    max_samples: int = Field(1000, ge=1)
    seed: Seed = 0


class SimilarityStep(BaseModel):
    verdict: Verdict
    similarity: float = Field(..., ge=0.0, le=100.0)


class ErrorStep(BaseModel):
    verdict: Verdict
    relative_error: Optional[float] = Field(None, description="Undefined when the set is too short")


# --- workloads ----------------------------------------------------------------


class LognormalModel(BaseModel):
    kind: Literal["lognormal"] = "lognormal"
    mu: float = Field(..., description="Mean of log-latency")
    sigma: float = Field(..., gt=0.0, description="Std-dev of log-latency")


class GammaModel(BaseModel):
    kind: Literal["gamma"] = "gamma"
    shape: float = Field(..., gt=0.0)
    scale: float = Field(..., gt=0.0, description="Scale in ms")


class AR1LognormalModel(BaseModel):
    """Lognormal latencies whose log process is a stationary AR(1)."""

    kind: Literal["ar1_lognormal"] = "ar1_lognormal"
    mu: float
    sigma: float = Field(..., gt=0.0, description="Stationary std-dev of log-latency")
    phi: float = Field(..., gt=-1.0, lt=1.0, description="Lag-1 autocorrelation")


class BimodalMixtureModel(BaseModel):
    """Draws component_b with probability `weight`, else component_a."""

    kind: Literal["bimodal"] = "bimodal"
    component_a: "LatencyModel"
    component_b: "LatencyModel"
    weight: float = Field(..., ge=0.0, le=1.0)


class ColdWarmMixModel(BaseModel):
    kind: Literal["cold_warm"] = "cold_warm"
    cold_spec: "LatencyModel"
    warm_spec: "LatencyModel"
    cold_probability: float = Field(..., ge=0.0, le=1.0)


class CompositeModel(BaseModel):
    """End-to-end latency of an application: the sum of its functions' latencies."""

    kind: Literal["composite"] = "composite"
    components: List["LatencyModel"] = Field(..., min_length=1)


LatencyModel = Annotated[
    Union[
        LognormalModel,
        GammaModel,
        AR1LognormalModel,
        BimodalMixtureModel,
        ColdWarmMixModel,
        CompositeModel,
    ],
    Field(discriminator="kind"),
]

for _model in (BimodalMixtureModel, ColdWarmMixModel, CompositeModel):
    _model.model_rebuild()


class WorkloadSpec(BaseModel):
    name: str = Field("workload", description="Label used in reports")
    model: LatencyModel
    seed: Seed = 0
    units: Literal["ms"] = "ms"

    def with_seed(self, seed: int) -> "WorkloadSpec":
        return self.model_copy(update={"seed": seed})


# --- evaluation harness ---------------------------------------------------------


TechniqueKind = Literal["scope1", "scope2", "scope3", "pt4cloud", "metior", "confirm", "fixed"]


class Technique(BaseModel):
    """A technique id such as `scope1`, `metior` or `fixed:500`."""

    model_config = ConfigDict(frozen=True)

    kind: TechniqueKind
    fixed_n: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_fixed(self) -> "Technique":
        if (self.kind == "fixed") != (self.fixed_n is not None):
            raise ValueError("fixed_n is required for, and only for, the fixed technique")
        return self

    @classmethod
    def parse(cls, text: str) -> "Technique":
        name, _, count = text.strip().lower().partition(":")
        if name == "fixed":
            return cls(kind="fixed", fixed_n=int(count) if count else None)
        return cls(kind=name)  # type: ignore[arg-type]

    @property
    def label(self) -> str:
        return f"fixed:{self.fixed_n}" if self.kind == "fixed" else self.kind

    @property
    def is_scope(self) -> bool:
        return self.kind.startswith("scope")


class HarnessConfig(BaseModel):
    test: TestConfig = Field(default_factory=TestConfig)
    pt4cloud: Pt4CloudConfig = Field(default_factory=Pt4CloudConfig)
    metior: MetiorConfig = Field(default_factory=MetiorConfig)
    confirm: ConfirmConfig = Field(default_factory=ConfirmConfig)
    ground_truth_size: int = Field(1000, ge=2)
    reliability_percentiles: List[Fraction] = Field(default_factory=lambda: list(RELIABILITY_PERCENTILES))
    session_stream: Literal["independent", "replay"] = Field(
        "independent",
        description="independent: sessions draw their own stream; replay: sessions re-run the ground-truth invocations",
    )

    def with_run_interval(self, run_interval: int) -> "HarnessConfig":
        """Copy with k applied to SCOPE and every baseline."""
        data = self.model_dump()
        for section in ("test", "pt4cloud", "metior", "confirm"):
            data[section]["run_interval"] = run_interval
        return HarnessConfig.model_validate(data)


class GroundTruth(BaseModel):
    workload: str
    seed: int
    series: List[float] = Field(..., min_length=1)
    reference: Dict[float, ConfidenceInterval] = Field(..., description="Order-statistic CIs at level 0.95")

    @property
    def size(self) -> int:
        return len(self.series)


class ExperimentReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    kind: Literal["experiment"] = "experiment"
    technique: str
    workload: str
    seed: Optional[int] = None
    stop_location: int = Field(..., ge=0)
    terminated_by: Termination
    accuracy: float = Field(..., ge=0.0, le=100.0)
    reliability: Dict[float, bool]
    total_repetitions: int = Field(..., ge=0)
    config: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_repetitions(self) -> "ExperimentReport":
        if self.total_repetitions != self.stop_location:
            raise ValueError("total_repetitions must equal stop_location")
        return self

    def to_csv_row(self) -> dict:
        """Convert to CSV row format."""
        row: Dict[str, Any] = {
            "workload": self.workload,
            "technique": self.technique,
            "seed": self.seed if self.seed is not None else "N/A",
            "stop_location": self.stop_location,
            "terminated_by": self.terminated_by.value,
            "accuracy": round(self.accuracy, 4),
            "total_repetitions": self.total_repetitions,
        }
        for p, reliable in sorted(self.reliability.items()):
            row[f"reliable_p{round(p * 100):d}"] = reliable
        return row


class CellFailure(BaseModel):
    workload: str
    technique: str
    seed: Optional[int] = None
    error: str


class StrategyAggregate(BaseModel):
    technique: str
    experiments: int = Field(..., ge=0)
    failures: int = Field(0, ge=0)
    mean_accuracy: Optional[float] = None
    reliability_fraction: Dict[float, float] = Field(default_factory=dict)
    total_repetitions: int = 0

    def to_csv_row(self) -> dict:
        """Convert to CSV row format."""
        row: Dict[str, Any] = {
            "technique": self.technique,
            "experiments": self.experiments,
            "failures": self.failures,
            "mean_accuracy": round(self.mean_accuracy, 4) if self.mean_accuracy is not None else "N/A",
            "total_repetitions": self.total_repetitions,
        }
        for p, fraction in sorted(self.reliability_fraction.items()):
            row[f"reliable_p{round(p * 100):d}"] = round(fraction, 4)
        return row


class ComparisonReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    kind: Literal["comparison"] = "comparison"
    cells: List[ExperimentReport]
    failures: List[CellFailure] = Field(default_factory=list)
    aggregates: List[StrategyAggregate]
    config: Dict[str, Any] = Field(default_factory=dict)

    def aggregate(self, technique: str) -> StrategyAggregate:
        for aggregate in self.aggregates:
            if aggregate.technique == technique:
                return aggregate
        raise KeyError(technique)


class SweepPoint(BaseModel):
    value: float
    aggregates: List[StrategyAggregate]


class SweepReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    kind: Literal["sweep"] = "sweep"
    parameter: str
    points: List[SweepPoint]
    config: Dict[str, Any] = Field(default_factory=dict)


class SessionReport(BaseModel):
    """Outcome of a single `test` session."""

    schema_version: int = SCHEMA_VERSION
    kind: Literal["session"] = "session"
    technique: str
    stop_location: int
    terminated_by: Termination
    verdict: Optional[Verdict]
    rounds: int
    percentiles: Dict[float, float] = Field(default_factory=dict, description="Empirical percentiles at stop")
    decision_trace: List[StopDecision] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)


class EvaluationReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    kind: Literal["evaluation"] = "evaluation"
    samples: int
    ground_truth_size: int
    accuracy: float = Field(..., ge=0.0, le=100.0)
    reliability: Dict[float, bool]
    config: Dict[str, Any] = Field(default_factory=dict)


Report = Annotated[
    Union[SessionReport, EvaluationReport, ExperimentReport, ComparisonReport, SweepReport],
    Field(discriminator="kind"),
]


# --- command line ---------------------------------------------------------------


class SourceDescriptor(BaseModel):
    """Where a `test` session draws its samples from."""

    kind: Literal["file", "exec", "preset"]
    value: str = Field(..., min_length=1)
    format: Literal["csv", "jsonl"] = "csv"
    timeout: float = Field(60.0, gt=0.0, description="Per-invocation timeout for exec sources, seconds")


class RunConfig(BaseModel):
    """Effective, fully resolved configuration of one CLI invocation."""

    command: Literal["test", "evaluate", "simulate", "compare", "sweep"]
    seed: Seed
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    technique: Optional[str] = None
    source: Optional[SourceDescriptor] = None
    ground_truth_path: Optional[str] = None
    workloads: List[WorkloadSpec] = Field(default_factory=list)
    techniques: List[str] = Field(default_factory=list)
    seeds: List[int] = Field(default_factory=list)
    sweep_parameter: Optional[str] = None
    sweep_values: List[float] = Field(default_factory=list)
    count: Optional[int] = Field(None, ge=1)
    output: Optional[str] = None
    format: Literal["json", "csv", "text", "jsonl"] = "json"
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_sources(self) -> "RunConfig":
        if self.command == "test" and self.source is None:
            raise ValueError("test needs exactly one of --input, --exec or --preset")
        if self.command in ("compare", "sweep") and not (self.workloads and self.techniques and self.seeds):
            raise ValueError(f"{self.command} needs non-empty workloads, techniques and seeds")
        if self.command == "sweep" and (self.sweep_parameter is None or not self.sweep_values):
            raise ValueError("sweep needs a parameter and at least one value")
        return self
