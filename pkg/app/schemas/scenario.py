"""
Scenario schema for the double-IRS link.

One ScenarioConfig drives every realization: geometry, surface sizes,
Rician factors, path-loss law and link budget. All stored values are
linear (Watts, linear power ratios, radians); dB quantities are converted
with the helpers below at the config boundary only.
"""

import math
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

from app.exceptions import ScenarioValidationError

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"
DEFAULT_SCENARIO_PATH = PRESET_DIR / "scenario_defaults.json"

Position = Tuple[float, float, float]


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio in dB to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB (``-inf`` for zero)."""
    if value <= 0:
        return -math.inf
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm to Watts."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Convert Watts to dBm."""
    return linear_to_db(value_w) + 30.0


def json_float(value: float) -> Union[float, str]:
    """
    JSON form of a float: non-finite values become "inf", "-inf" or "nan".

    Plain JSON has no infinity, and pydantic parses these strings back to floats.
    """
    if math.isfinite(value):
        return value
    if math.isnan(value):
        return "nan"
    return "inf" if value > 0 else "-inf"


class ScenarioConfig(BaseModel):
    """Geometry, surface sizes, fading and link budget of one deployment."""

    user_pos: Position = Field(..., description="User location (m)")
    ap_pos: Position = Field(..., description="AP location (m)")
    irs1_pos: Position = Field(..., description="Centre of IRS 1 (m)")
    irs2_pos: Position = Field(..., description="Centre of IRS 2 (m)")
    irs1_azimuth: float = Field(..., description="IRS 1 array axis w.r.t. x-axis (rad)")
    irs2_azimuth: float = Field(..., description="IRS 2 array axis w.r.t. x-axis (rad)")
    M1: int = Field(..., ge=1, description="Sub-surfaces on IRS 1")
    M2: int = Field(..., ge=1, description="Sub-surfaces on IRS 2")
    N0: int = Field(..., ge=1, description="Elements per sub-surface")
    K_U: float = Field(..., ge=0, description="Rician factor user-IRS 1 (linear)")
    K_I: float = Field(..., ge=0, description="Rician factor IRS 1-IRS 2 (linear)")
    K_A: float = Field(..., ge=0, description="Rician factor IRS 2-AP (linear)")
    beta0: float = Field(..., gt=0, le=1, description="Reference power gain at d0 (linear)")
    d0: float = Field(..., gt=0, description="Reference distance (m)")
    alpha_U: float = Field(..., ge=2, description="Path-loss exponent user-IRS 1")
    alpha_I: float = Field(..., ge=2, description="Path-loss exponent IRS 1-IRS 2")
    alpha_A: float = Field(..., ge=2, description="Path-loss exponent IRS 2-AP")
    alpha_single: float = Field(..., ge=2, description="Path-loss exponent IRS-AP of the single-IRS baseline")
    P: float = Field(..., gt=0, description="User transmit power (W)")
    sigma0_sq: float = Field(..., ge=0, description="Noise power at the AP (W); 0 selects noise-free test mode")
    Gamma: float = Field(..., ge=1, description="Rate gap (linear)")
    T: int = Field(..., ge=1, description="Coherence-block length (symbols)")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("irs1_azimuth", "irs2_azimuth")
    @classmethod
    def validate_azimuth(cls, v):
        """Azimuths must be finite angles."""
        if not math.isfinite(v):
            raise ValueError("Azimuth must be a finite angle in radians")
        return v

    @field_serializer("K_U", "K_I", "K_A", when_used="json")
    def serialize_rician_factor(self, v: float) -> Union[float, str]:
        """K = inf (pure LoS) survives a JSON round trip."""
        return json_float(v)

    @model_validator(mode="after")
    def validate_geometry(self):
        """Every link must have a positive length."""
        links = {
            "user-IRS1": (self.user_pos, self.irs1_pos),
            "IRS1-IRS2": (self.irs1_pos, self.irs2_pos),
            "IRS2-AP": (self.irs2_pos, self.ap_pos),
        }
        for name, (a, b) in links.items():
            if math.dist(a, b) <= 0:
                raise ValueError(f"Link {name} has coincident endpoints")
        return self

    @property
    def N1(self) -> int:
        """Elements on IRS 1."""
        return self.M1 * self.N0

    @property
    def N2(self) -> int:
        """Elements on IRS 2."""
        return self.M2 * self.N0

    @property
    def noise_power_normalized(self) -> float:
        """Normalized noise power sigma^2 = sigma0^2 / P."""
        return self.sigma0_sq / self.P

    def training_length(self, scheme: str) -> int:
        """Pilot symbols spent by a scheme in one block."""
        lengths = {
            "S1": self.M1 * self.M2,
            "S2": self.M1 + self.M2,
            "single": self.M1 + self.M2,
            "perfect": 0,
        }
        if scheme not in lengths:
            raise ScenarioValidationError(f"Unknown scheme '{scheme}'")
        return lengths[scheme]

    def check_training_budget(self, scheme: str, T: Optional[int] = None) -> None:
        """Raise when the block is too short for the scheme's training."""
        block = self.T if T is None else T
        needed = self.training_length(scheme)
        if needed > block:
            raise ScenarioValidationError(
                f"Scheme {scheme} needs {needed} training symbols but the block has T={block}",
                details={"scheme": scheme, "training_length": needed, "T": block},
            )

    def with_updates(self, **changes: Any) -> "ScenarioConfig":
        """Return a validated copy with some fields replaced."""
        data: Dict[str, Any] = self.model_dump()
        data.update(changes)
        return ScenarioConfig.model_validate(data)

    def canonical_json(self) -> str:
        """Canonical JSON (declared field order, compact)."""
        return self.model_dump_json()


def load_scenario(path: Path) -> ScenarioConfig:
    """Load a ScenarioConfig from a JSON file."""
    return ScenarioConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))


def default_scenario() -> ScenarioConfig:
    """The bundled default deployment (M=6, N0=10, K_I=20 dB, P=20 dBm, T=150)."""
    return load_scenario(DEFAULT_SCENARIO_PATH)
