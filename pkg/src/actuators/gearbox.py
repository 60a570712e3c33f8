"""Feasibility constraints for single-stage planetary gear trains.

Every check returns data; an infeasible train is a normal result, never an
exception.
"""

import math
from fractions import Fraction

from ..models.gearing import (
    BoundsCheck,
    ConstraintReport,
    GearboxBounds,
    GearboxKind,
    GearTrain,
    GeometryCheck,
    InterferenceCheck,
    MeshingCheck,
    MotorSpec,
    RatioCheck,
    exact,
)

# Float tolerance on the interference clearance (mm)
CLEARANCE_EPS = 1e-9


def gear_ratio(gt: GearTrain) -> Fraction:
    """Sun-input, carrier-output reduction (Ns + Nr) / Ns, exact."""
    return Fraction(gt.sun_teeth + gt.ring_teeth, gt.sun_teeth)


def check_ratio(gt: GearTrain, bounds: GearboxBounds) -> RatioCheck:
    ratio = gear_ratio(gt)
    return RatioCheck(
        passed=bounds.contains_ratio(ratio),
        ratio=float(ratio),
        lo=bounds.gr_min,
        hi=bounds.gr_max,
    )


def check_geometry(gt: GearTrain) -> GeometryCheck:
    """Sun, planets and ring share centres only if Nr = Ns + 2 Np."""
    residual = gt.ring_teeth - gt.sun_teeth - 2 * gt.planet_teeth
    return GeometryCheck(passed=residual == 0, residual=residual)


def check_meshing(gt: GearTrain) -> MeshingCheck:
    """Equally spaced planets mesh with both sun and ring iff n_p divides Ns + Nr."""
    remainder = (gt.sun_teeth + gt.ring_teeth) % gt.planet_count
    return MeshingCheck(passed=remainder == 0, remainder=remainder)


def planet_clearance(gt: GearTrain) -> float:
    """Tip-free gap between neighbouring planet pitch circles (mm)."""
    m = gt.module
    return (2 * m * (gt.sun_teeth + gt.planet_teeth) * math.sin(math.pi / gt.planet_count)
            - 2 * m * gt.planet_teeth)


def check_interference(gt: GearTrain, delta_p: float) -> InterferenceCheck:
    clearance = planet_clearance(gt)
    return InterferenceCheck(passed=clearance >= delta_p - CLEARANCE_EPS, clearance_mm=clearance)


def diameter_limit(kind: GearboxKind, motor: MotorSpec, delta_clr: float) -> Fraction:
    """Largest ring pitch diameter (mm) that fits the motor for this gearbox kind."""
    envelope = motor.outer_diameter if kind == GearboxKind.ESSPG else motor.stator_inner_diameter
    return exact(envelope) - exact(delta_clr)


def check_bounds(
    gt: GearTrain,
    kind: GearboxKind,
    motor: MotorSpec,
    bounds: GearboxBounds,
) -> BoundsCheck:
    """Variable ranges and the motor-envelope diameter bound.

    Args:
        gt: Gear train to check
        kind: Gearbox placement
        motor: Motor whose envelope limits the ring
        bounds: Variable limits

    Returns:
        BoundsCheck with one flag per limit
    """
    module = exact(gt.module)
    limit = diameter_limit(kind, motor, bounds.delta_clr)
    ring_diameter = module * gt.ring_teeth

    teeth = (gt.sun_teeth, gt.planet_teeth, gt.ring_teeth)
    teeth_ok = all(n >= bounds.N_min for n in teeth)
    if bounds.max_teeth is not None:
        teeth_ok = teeth_ok and gt.sun_teeth <= bounds.max_teeth and gt.planet_teeth <= bounds.max_teeth

    return BoundsCheck(
        module_ok=exact(bounds.m_min) <= module <= exact(bounds.m_max),
        module_in_set=any(module == exact(m) for m in bounds.modules),
        teeth_ok=teeth_ok,
        diameter_ok=ring_diameter <= limit,
        planets_ok=bounds.n_p_min <= gt.planet_count <= bounds.n_p_max,
        ring_pitch_diameter_mm=float(ring_diameter),
        diameter_limit_mm=float(limit),
    )


def validate(
    gt: GearTrain,
    kind: GearboxKind,
    motor: MotorSpec,
    bounds: GearboxBounds,
) -> ConstraintReport:
    """Evaluate every constraint; the train is feasible iff all of them pass."""
    return ConstraintReport(
        gear_train=gt,
        kind=kind,
        ratio=check_ratio(gt, bounds),
        geometry=check_geometry(gt),
        meshing=check_meshing(gt),
        interference=check_interference(gt, bounds.delta_p),
        bounds=check_bounds(gt, kind, motor, bounds),
    )
