"""Component-level mass models for actuators and leg links.

All actuator dimensions come from ``actuator_dimensions``; the design manifest
uses the same routine so the two can never disagree.
"""

import math
from typing import Optional

from ..models.actuator import (
    ActuatorDesign,
    ActuatorDimensions,
    ActuatorGeometry,
    LinkMassParams,
    MassBreakdown,
    MaterialTable,
)
from ..models.gearing import GearboxBounds, GearboxKind, GearTrain, MotorSpec
from .gearbox import gear_ratio, validate

MM3_TO_M3 = 1e-9
LINK_LENGTH_RANGE = (0.05, 1.0)  # m


class InfeasibleGearTrainError(ValueError):
    """Raised when a mass is requested for a train that fails a constraint."""


def _disk(diameter: float, thickness: float) -> float:
    return math.pi / 4.0 * diameter ** 2 * thickness


def _annulus(outer: float, inner: float, thickness: float) -> float:
    return math.pi / 4.0 * (outer ** 2 - inner ** 2) * thickness


def bearing_mass(bore_diameter: float, materials: MaterialTable) -> float:
    """Catalog power law a * bore**b (bore in mm, result in kg).

    Raises:
        ValueError: If the bore is not positive
    """
    if not bore_diameter > 0:
        raise ValueError(f"bearing bore must be positive, got {bore_diameter}")
    return materials.bearing_a * bore_diameter ** materials.bearing_b


def actuator_dimensions(
    gt: GearTrain,
    kind: GearboxKind,
    motor: MotorSpec,
    geometry: Optional[ActuatorGeometry] = None,
) -> ActuatorDimensions:
    """Derive every actuator dimension (mm) from the gear train and motor."""
    geometry = geometry or ActuatorGeometry()
    m = gt.module
    sun = m * gt.sun_teeth
    planet = m * gt.planet_teeth
    ring = m * gt.ring_teeth
    centers = m * (gt.sun_teeth + gt.planet_teeth)
    face_width = geometry.face_width_factor * m
    sun_bore = geometry.sun_bore_factor * sun
    stack = face_width + geometry.carrier_plate_count * geometry.carrier_plate_thickness + geometry.axial_clearance
    if kind == GearboxKind.ESSPG:
        casing, casing_length = motor.outer_diameter, stack
    else:
        # The stator already encloses the stack; only an overhang needs a casing
        casing, casing_length = motor.stator_inner_diameter, max(stack - motor.axial_length, 0.0)

    return ActuatorDimensions(
        sun_pitch_diameter=sun,
        planet_pitch_diameter=planet,
        ring_pitch_diameter=ring,
        ring_outer_diameter=ring + 2.0 * geometry.ring_rim_factor * m,
        planet_center_diameter=centers,
        face_width=face_width,
        carrier_outer_diameter=centers + geometry.carrier_pin_boss,
        carrier_inner_diameter=sun_bore,
        carrier_plate_thickness=geometry.carrier_plate_thickness,
        casing_diameter=casing,
        casing_length=casing_length,
        casing_wall=geometry.casing_wall,
        backplate_diameter=casing,
        backplate_thickness=geometry.backplate_thickness,
        sun_bore=sun_bore,
        output_bore=geometry.output_bore_factor * centers,
        coupling_diameter=max(sun, sun_bore + 2.0 * geometry.coupling_wall),
        coupling_length=geometry.coupling_length,
    )


def actuator_mass(
    gt: GearTrain,
    kind: GearboxKind,
    motor: MotorSpec,
    materials: MaterialTable,
    geometry: Optional[ActuatorGeometry] = None,
    bounds: Optional[GearboxBounds] = None,
) -> MassBreakdown:
    """Sum component masses for a feasible train.

    Gears are steel, everything else except the motor and bearings is
    aluminium. The ISSPG casing sits in the stator bore and only covers the
    part of the gear stack longer than the motor; the ESSPG casing wraps the
    motor outer diameter over the full stack.

    Raises:
        InfeasibleGearTrainError: If the train fails any constraint
    """
    report = validate(gt, kind, motor, bounds or GearboxBounds())
    if not report.feasible:
        raise InfeasibleGearTrainError(
            f"infeasible gear train {gt.label()} ({kind.value}): "
            f"failed {', '.join(report.failures())}"
        )

    geometry = geometry or ActuatorGeometry()
    dims = actuator_dimensions(gt, kind, motor, geometry)
    steel = materials.steel_density * MM3_TO_M3
    aluminum = materials.aluminum_density * MM3_TO_M3
    w = dims.face_width

    return MassBreakdown.from_components(
        motor=motor.mass,
        sun_gear=_disk(dims.sun_pitch_diameter, w) * steel,
        planet_gears=gt.planet_count * _disk(dims.planet_pitch_diameter, w) * steel,
        ring_gear=_annulus(dims.ring_outer_diameter, dims.ring_pitch_diameter, w) * steel,
        carrier=(geometry.carrier_plate_count
                 * _annulus(dims.carrier_outer_diameter, dims.carrier_inner_diameter,
                            dims.carrier_plate_thickness) * aluminum),
        casing=_annulus(dims.casing_diameter, dims.casing_diameter - 2.0 * dims.casing_wall,
                        dims.casing_length) * aluminum,
        backplate=_disk(dims.backplate_diameter, dims.backplate_thickness) * aluminum,
        coupling=_disk(dims.coupling_diameter, dims.coupling_length) * aluminum,
        bearings=bearing_mass(dims.sun_bore, materials) + bearing_mass(dims.output_bore, materials),
    )


def link_mass(length: float, params: LinkMassParams, materials: MaterialTable) -> float:
    """Sandwich link mass (kg), affine in length (m).

    Raises:
        ValueError: If length is outside [0.05, 1.0] m
    """
    lo, hi = LINK_LENGTH_RANGE
    if not lo <= length <= hi:
        raise ValueError(f"link length {length} m outside [{lo}, {hi}] m")
    return link_mass_slope(params, materials) * length + params.fixed_hardware_mass


def link_mass_slope(params: LinkMassParams, materials: MaterialTable) -> float:
    """Mass per metre of link (kg/m)."""
    width = params.plate_width * 1e-3
    plates = 2.0 * width * params.plate_thickness * 1e-3 * materials.aluminum_density
    core = width * params.core_thickness * 1e-3 * materials.plastic_density
    return plates + core + params.chain_linear_density


def make_actuator(
    gt: GearTrain,
    kind: GearboxKind,
    motor: MotorSpec,
    materials: MaterialTable,
    geometry: Optional[ActuatorGeometry] = None,
    bounds: Optional[GearboxBounds] = None,
) -> ActuatorDesign:
    """Bundle a feasible train into an actuator with mass and peak torque."""
    breakdown = actuator_mass(gt, kind, motor, materials, geometry, bounds)
    ratio = float(gear_ratio(gt))
    return ActuatorDesign(
        gear_train=gt,
        kind=kind,
        motor=motor,
        mass=breakdown.total,
        peak_torque=ratio * motor.peak_torque,
        ratio=ratio,
        breakdown=breakdown,
    )
