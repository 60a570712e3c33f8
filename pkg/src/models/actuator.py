"""Data models for actuator mass modelling and the Stage-1 actuator catalog."""

import math
from fractions import Fraction
from typing import ClassVar, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from .gearing import GearboxKind, GearTrain, MotorSpec, exact


class BearingRow(BaseModel):
    """One datasheet entry: deep-groove ball bearing bore and mass."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    bore: PositiveFloat  # mm
    mass: PositiveFloat  # kg


DEFAULT_BEARING_ROWS = [
    BearingRow(bore=10, mass=0.0055),
    BearingRow(bore=15, mass=0.0078),
    BearingRow(bore=20, mass=0.0180),
    BearingRow(bore=25, mass=0.0220),
    BearingRow(bore=30, mass=0.0270),
    BearingRow(bore=35, mass=0.0300),
    BearingRow(bore=40, mass=0.0370),
    BearingRow(bore=45, mass=0.0400),
    BearingRow(bore=50, mass=0.0520),
]


def fit_power_law(rows: List[BearingRow]) -> Tuple[float, float]:
    """Least-squares fit of mass = a * bore**b in log-log space.

    Returns:
        (a, b)
    """
    if len(rows) < 2:
        raise ValueError("at least two bearing rows are needed to fit the power law")
    bores = np.log([row.bore for row in rows])
    masses = np.log([row.mass for row in rows])
    b, log_a = np.polyfit(bores, masses, 1)
    return float(math.exp(log_a)), float(b)


class MaterialTable(BaseModel):
    """Densities (kg/m³) and the bearing mass regression."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    aluminum_density: PositiveFloat = 2700.0
    steel_density: PositiveFloat = 7850.0
    plastic_density: PositiveFloat = 1240.0
    bearing_catalog: List[BearingRow] = Field(default_factory=lambda: list(DEFAULT_BEARING_ROWS))
    bearing_a: Optional[PositiveFloat] = None
    bearing_b: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _fit_bearing_law(self) -> "MaterialTable":
        if self.bearing_a is None or self.bearing_b is None:
            a, b = fit_power_law(self.bearing_catalog)
            if b <= 0:
                raise ValueError(f"bearing catalog gives a non-increasing fit (b={b:.4f})")
            # frozen model: write through __dict__ once during validation
            self.__dict__["bearing_a"] = a
            self.__dict__["bearing_b"] = b
        return self


class ActuatorGeometry(BaseModel):
    """Component proportions used to dimension an actuator from its gear train (mm unless noted)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    face_width_factor: PositiveFloat = 10.0  # × module
    ring_rim_factor: PositiveFloat = 3.0  # × module
    casing_wall: PositiveFloat = 2.0
    backplate_thickness: PositiveFloat = 3.0
    carrier_plate_thickness: PositiveFloat = 4.0
    carrier_plate_count: PositiveInt = 2
    carrier_pin_boss: NonNegativeFloat = 6.0
    sun_bore_factor: float = Field(default=0.5, gt=0.0, lt=1.0)  # × sun pitch diameter
    output_bore_factor: float = Field(default=0.5, gt=0.0, lt=1.0)  # × planet-centre diameter
    coupling_length: PositiveFloat = 8.0
    coupling_wall: PositiveFloat = 2.0
    axial_clearance: NonNegativeFloat = 2.0


class LinkMassParams(BaseModel):
    """Sandwich link: two aluminium plates around a printed core, plus chain and hardware."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    plate_thickness: NonNegativeFloat = 2.0  # mm
    plate_width: NonNegativeFloat = 30.0  # mm
    core_thickness: NonNegativeFloat = 10.0  # mm
    chain_linear_density: NonNegativeFloat = 0.15  # kg/m
    fixed_hardware_mass: NonNegativeFloat = 0.08  # kg


class ActuatorDimensions(BaseModel):
    """Every dimension derived from a gear train; shared by the mass model and the manifest."""
    model_config = ConfigDict(frozen=True)

    sun_pitch_diameter: float
    planet_pitch_diameter: float
    ring_pitch_diameter: float
    ring_outer_diameter: float
    planet_center_diameter: float
    face_width: float
    carrier_outer_diameter: float
    carrier_inner_diameter: float
    carrier_plate_thickness: float
    casing_diameter: float
    casing_length: float
    casing_wall: float
    backplate_diameter: float
    backplate_thickness: float
    sun_bore: float
    output_bore: float
    coupling_diameter: float
    coupling_length: float


class MassBreakdown(BaseModel):
    """Per-component actuator mass in kg."""
    model_config = ConfigDict(frozen=True)

    motor: NonNegativeFloat
    sun_gear: NonNegativeFloat
    planet_gears: NonNegativeFloat
    ring_gear: NonNegativeFloat
    carrier: NonNegativeFloat
    casing: NonNegativeFloat
    backplate: NonNegativeFloat
    coupling: NonNegativeFloat
    bearings: NonNegativeFloat
    total: NonNegativeFloat

    COMPONENTS: ClassVar[Tuple[str, ...]] = (
        "motor", "sun_gear", "planet_gears", "ring_gear", "carrier",
        "casing", "backplate", "coupling", "bearings",
    )

    @model_validator(mode="after")
    def _check_total(self) -> "MassBreakdown":
        parts = sum(getattr(self, name) for name in self.COMPONENTS)
        if abs(parts - self.total) > 1e-9:
            raise ValueError(f"total {self.total} does not equal component sum {parts}")
        return self

    @classmethod
    def from_components(cls, **components: float) -> "MassBreakdown":
        return cls(total=math.fsum(components[name] for name in cls.COMPONENTS), **components)


class ActuatorDesign(BaseModel):
    """A feasible gear train paired with the motor, with its mass and output torque."""
    model_config = ConfigDict(frozen=True)

    gear_train: GearTrain
    kind: GearboxKind
    motor: MotorSpec
    mass: PositiveFloat  # kg
    peak_torque: PositiveFloat  # N·m
    ratio: PositiveFloat
    breakdown: MassBreakdown

    @model_validator(mode="after")
    def _check_consistency(self) -> "ActuatorDesign":
        expected = float(self.exact_ratio)
        if self.ratio != expected:
            raise ValueError(f"ratio {self.ratio} does not match gear train ratio {expected}")
        if not math.isclose(self.peak_torque, self.ratio * self.motor.peak_torque, rel_tol=1e-12):
            raise ValueError("peak_torque must equal ratio × motor peak torque")
        if self.mass <= self.motor.mass:
            raise ValueError("actuator mass must exceed the bare motor mass")
        return self

    @property
    def exact_ratio(self) -> Fraction:
        gt = self.gear_train
        return Fraction(gt.sun_teeth + gt.ring_teeth, gt.sun_teeth)


class RatioBin(BaseModel):
    """One ratio interval [lo, hi); the last bin of a grid also contains hi."""
    model_config = ConfigDict(frozen=True)

    index: int
    lo: float
    hi: float
    closed_upper: bool = False

    def contains(self, ratio: Fraction) -> bool:
        lo, hi = exact(self.lo), exact(self.hi)
        if self.closed_upper:
            return lo <= ratio <= hi
        return lo <= ratio < hi

    def label(self) -> str:
        close = "]" if self.closed_upper else ")"
        return f"[{self.lo:.1f}, {self.hi:.1f}{close}"


class RatioGrid(BaseModel):
    """Gear-ratio sweep of contiguous bins."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: PositiveFloat = 4.0
    hi: PositiveFloat = 15.0
    step: PositiveFloat = 0.1

    @model_validator(mode="after")
    def _check_grid(self) -> "RatioGrid":
        if not self.lo < self.hi:
            raise ValueError(f"lo ({self.lo}) must be below hi ({self.hi})")
        count = (self.hi - self.lo) / self.step
        if abs(count - round(count)) > 1e-9:
            raise ValueError(f"(hi - lo) / step = {count} is not an integer")
        return self

    @property
    def bin_count(self) -> int:
        return int((exact(self.hi) - exact(self.lo)) / exact(self.step))

    def bins(self) -> List[RatioBin]:
        lo, step = exact(self.lo), exact(self.step)
        count = self.bin_count
        return [
            RatioBin(
                index=i,
                lo=float(lo + i * step),
                hi=float(lo + (i + 1) * step),
                closed_upper=(i == count - 1),
            )
            for i in range(count)
        ]

    def bin_index(self, ratio: Fraction) -> Optional[int]:
        """Index of the bin holding ``ratio``, or None outside the grid."""
        lo, hi, step = exact(self.lo), exact(self.hi), exact(self.step)
        if ratio < lo or ratio > hi:
            return None
        if ratio == hi:
            return self.bin_count - 1
        return int((ratio - lo) // step)


class CatalogBin(BaseModel):
    """Lightest actuator overall and per kind for one ratio bin."""
    model_config = ConfigDict(frozen=True)

    bin: RatioBin
    best: Optional[ActuatorDesign] = None
    best_isspg: Optional[ActuatorDesign] = None
    best_esspg: Optional[ActuatorDesign] = None
    feasible_isspg: int = 0
    feasible_esspg: int = 0


class ActuatorCatalog(BaseModel):
    """Stage-1 output: ratio bin -> lightest actuator."""
    model_config = ConfigDict(frozen=True)

    grid: RatioGrid
    motor: MotorSpec
    kinds: List[GearboxKind]
    bins: List[CatalogBin]

    def non_empty(self) -> List[CatalogBin]:
        return [entry for entry in self.bins if entry.best is not None]
