"""
Experiment schemas for sweep configuration and stored results.

ExperimentConfig drives run_sweep from the CLI and the API; the response
models mirror the experiment_runs / sweep_rows tables.
"""

from datetime import datetime
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

from app.schemas.scenario import ScenarioConfig, json_float

SweepKind = Literal["rician_nmse", "rician_snr", "rate_vs_m", "rate_vs_power", "custom"]
SchemeName = Literal["S1", "S2", "single", "perfect"]
ArrayLayoutName = Literal["subsurface", "element"]

ALL_SCHEMES: List[str] = ["S1", "S2", "single", "perfect"]

MAX_SEED = 2**64 - 1

# Scalar scenario fields a custom sweep may vary
SWEEPABLE_FIELDS = {
    "irs1_azimuth", "irs2_azimuth", "M1", "M2", "N0", "K_U", "K_I", "K_A",
    "beta0", "d0", "alpha_U", "alpha_I", "alpha_A", "alpha_single",
    "P", "sigma0_sq", "Gamma", "T",
}


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo sweep.

    sweep_values are in user units: K_I in dB for the Rician sweeps, P in dBm
    for rate_vs_power, M (= M1 = M2) for rate_vs_m, and raw linear values of
    ``sweep_field`` for a custom sweep.
    """
    name: Optional[str] = Field(None, max_length=100, description="Optional label for the run")
    scenario: ScenarioConfig = Field(..., description="Base scenario the sweep varies")
    sweep: SweepKind = Field(..., description="Sweep kind")
    sweep_values: List[float] = Field(..., min_length=1, description="Values of the swept parameter")
    sweep_field: Optional[str] = Field(None, description="Scenario field varied by a custom sweep")
    n_trials: int = Field(default=500, ge=1, description="Channel realizations per sweep value")
    master_seed: int = Field(default=0, ge=0, le=MAX_SEED, description="Seed all trial streams derive from (u64)")
    schemes: List[SchemeName] = Field(default_factory=lambda: list(ALL_SCHEMES), min_length=1)
    coherence_lengths: Optional[List[int]] = Field(None, description="Block lengths T for rate metrics")
    array_layout: ArrayLayoutName = Field(default="subsurface", description="Surface layout of the channel model")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("schemes")
    @classmethod
    def validate_schemes(cls, v):
        """Schemes must not repeat."""
        if len(set(v)) != len(v):
            raise ValueError("Schemes must be unique")
        return v

    @field_validator("coherence_lengths")
    @classmethod
    def validate_coherence_lengths(cls, v):
        """Every block length must be positive and listed once."""
        if v is None:
            return v
        if not v:
            raise ValueError("coherence_lengths must not be empty")
        if any(T < 1 for T in v):
            raise ValueError("Coherence lengths must be at least 1")
        if len(set(v)) != len(v):
            raise ValueError("Coherence lengths must be unique")
        return v

    @model_validator(mode="after")
    def validate_sweep_field(self):
        """A custom sweep names one scalar scenario field; other sweeps name none."""
        if self.sweep == "custom":
            if self.sweep_field not in SWEEPABLE_FIELDS:
                raise ValueError(f"Custom sweeps need sweep_field in {sorted(SWEEPABLE_FIELDS)}")
        elif self.sweep_field is not None:
            raise ValueError("sweep_field is only used by custom sweeps")
        if self.sweep == "rate_vs_m" and any(v < 1 or v != int(v) for v in self.sweep_values):
            raise ValueError("rate_vs_m values must be positive integers")
        return self

    @field_serializer("sweep_values", when_used="json")
    def serialize_sweep_values(self, v: List[float]) -> List[Union[float, str]]:
        return [json_float(value) for value in v]

    @property
    def block_lengths(self) -> List[int]:
        """Coherence lengths to report rates for; defaults to the scenario's T."""
        return list(self.coherence_lengths) if self.coherence_lengths else [self.scenario.T]


class PathLossRequest(BaseModel):
    """Schema for a quick path-loss evaluation."""
    distance: float = Field(..., gt=0, description="Link distance (m)")
    alpha: float = Field(..., ge=2, description="Path-loss exponent")
    scenario: Optional[ScenarioConfig] = Field(None, description="Scenario providing beta0 and d0; defaults apply when omitted")


class PathLossResponse(BaseModel):
    """Schema for path-loss responses."""
    distance: float
    alpha: float
    gain: float
    gain_db: float


class SweepRowResponse(BaseModel):
    """Schema for one aggregated result row."""
    sweep_value: float
    scheme: str
    metric: str
    mean: Optional[float]
    stderr: Optional[float]
    n_valid: int
    n_degenerate: int

    model_config = {"from_attributes": True}


class ExperimentRunSummary(BaseModel):
    """Schema for experiment run listings."""
    id: int
    name: Optional[str]
    sweep: str
    n_trials: int
    master_seed: int
    created_at: datetime
    duration_seconds: float

    model_config = {"from_attributes": True}


class ExperimentRunResponse(ExperimentRunSummary):
    """Schema for a stored experiment run with its configuration and rows."""
    config: ExperimentConfig
    rows: List[SweepRowResponse] = Field(default_factory=list)
