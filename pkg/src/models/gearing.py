"""Data models for single-stage planetary gear trains and their constraints."""

from enum import Enum
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator


DEFAULT_MODULES_MM = [0.5, 0.6, 0.8, 1.0, 1.2]


def exact(value: float) -> Fraction:
    """Exact rational for a decimal config value (4.1 -> 41/10, not the binary float)."""
    return Fraction(repr(float(value)))


class GearboxKind(str, Enum):
    """Where the planetary stage sits relative to the motor."""
    ISSPG = "isspg"  # inside the stator bore
    ESSPG = "esspg"  # appended outside the motor body


class GearTrain(BaseModel):
    """Sun-input, carrier-output planetary stage: X = [Ns, Np, Nr, m, n_p]."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    sun_teeth: PositiveInt
    planet_teeth: PositiveInt
    ring_teeth: PositiveInt
    module: PositiveFloat  # mm
    planet_count: PositiveInt

    @property
    def sort_key(self):
        return (self.sun_teeth, self.planet_teeth, self.ring_teeth, self.module, self.planet_count)

    def label(self) -> str:
        return (f"[{self.sun_teeth}, {self.planet_teeth}, {self.ring_teeth}, "
                f"{self.module:g}, {self.planet_count}]")


class MotorSpec(BaseModel):
    """BLDC motor datasheet values (mm / kg / N·m)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "Vector Technics 8020"
    mass: PositiveFloat = 0.650
    outer_diameter: PositiveFloat = 88.0
    stator_inner_diameter: PositiveFloat = 60.0
    axial_length: PositiveFloat = 25.0
    peak_torque: PositiveFloat = 2.5
    rotor_inertia: float = Field(default=0.0, ge=0.0)  # kg·m²

    @model_validator(mode="after")
    def _check_bore(self) -> "MotorSpec":
        if self.stator_inner_diameter >= self.outer_diameter:
            raise ValueError(
                f"stator_inner_diameter ({self.stator_inner_diameter}) must be smaller "
                f"than outer_diameter ({self.outer_diameter})"
            )
        return self


class GearboxBounds(BaseModel):
    """Limits on the optimization variables and the ratio window being searched.

    The ratio window is half-open, [gr_min, gr_max), unless ``gr_max_inclusive``
    is set; the last bin of a ratio sweep closes its upper edge.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    gr_min: PositiveFloat = 4.0
    gr_max: PositiveFloat = 15.0
    gr_max_inclusive: bool = True
    m_min: PositiveFloat = 0.5
    m_max: PositiveFloat = 1.2
    N_min: PositiveInt = 18
    delta_p: float = Field(default=5.0, ge=0.0)
    delta_clr: float = Field(default=10.0, ge=0.0)
    n_p_min: PositiveInt = 2
    n_p_max: PositiveInt = 7
    modules: List[PositiveFloat] = Field(default_factory=lambda: list(DEFAULT_MODULES_MM))
    # Optional hard cap on sun/planet teeth, used to run reduced search grids
    max_teeth: Optional[PositiveInt] = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "GearboxBounds":
        if not self.gr_min < self.gr_max:
            raise ValueError(f"gr_min ({self.gr_min}) must be below gr_max ({self.gr_max})")
        if self.m_min > self.m_max:
            raise ValueError(f"m_min ({self.m_min}) exceeds m_max ({self.m_max})")
        if self.n_p_min > self.n_p_max:
            raise ValueError(f"n_p_min ({self.n_p_min}) exceeds n_p_max ({self.n_p_max})")
        if not self.modules:
            raise ValueError("modules must list at least one gear module")
        return self

    def with_ratio_window(self, lo: float, hi: float, inclusive: bool = False) -> "GearboxBounds":
        return self.model_copy(update={"gr_min": lo, "gr_max": hi, "gr_max_inclusive": inclusive})

    def contains_ratio(self, ratio: Fraction) -> bool:
        lo, hi = exact(self.gr_min), exact(self.gr_max)
        if self.gr_max_inclusive:
            return lo <= ratio <= hi
        return lo <= ratio < hi


# Constraint checks. Each is a small frozen record so a report can say which
# constraint failed and by how much.

class RatioCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    ratio: float
    lo: float
    hi: float


class GeometryCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    residual: int  # Nr - Ns - 2 Np


class MeshingCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    remainder: int  # (Ns + Nr) mod n_p


class InterferenceCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool
    clearance_mm: float


class BoundsCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    module_ok: bool
    module_in_set: bool
    teeth_ok: bool
    diameter_ok: bool
    planets_ok: bool
    ring_pitch_diameter_mm: float
    diameter_limit_mm: float

    @property
    def passed(self) -> bool:
        return (self.module_ok and self.module_in_set and self.teeth_ok
                and self.diameter_ok and self.planets_ok)


class ConstraintReport(BaseModel):
    """Outcome of every feasibility constraint for one train and gearbox kind."""
    model_config = ConfigDict(frozen=True)

    gear_train: GearTrain
    kind: GearboxKind
    ratio: RatioCheck
    geometry: GeometryCheck
    meshing: MeshingCheck
    interference: InterferenceCheck
    bounds: BoundsCheck

    @property
    def feasible(self) -> bool:
        return not self.failures()

    def failures(self) -> List[str]:
        """Names of the constraints that did not pass."""
        failed = []
        if not self.ratio.passed:
            failed.append("ratio")
        if not self.geometry.passed:
            failed.append("geometry")
        if not self.meshing.passed:
            failed.append("meshing")
        if not self.interference.passed:
            failed.append("interference")
        if not self.bounds.passed:
            failed.append("bounds")
        return failed
