"""Parametric design manifest: every dimension a CAD template of the robot consumes.

Numeric keys carry their unit in the name so the file reads without a schema.
"""

from typing import Dict

from pydantic import BaseModel, ConfigDict


MANIFEST_SCHEMA_VERSION = "1"

UNIT_SUFFIXES = (
    "_mm", "_m", "_kg", "_Nm", "_N_per_m", "_Ns_per_m", "_Nm_per_rad",
    "_Nms_per_rad", "_rad", "_count", "_ratio", "_s", "_J", "_id",
)


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Provenance(_Section):
    config_sha256: str
    seed_id: int
    tool_version: str
    case: str


class LinkSection(_Section):
    thigh_length_m: float
    shank_length_m: float
    thigh_mass_kg: float
    shank_mass_kg: float


class BodySection(_Section):
    base_mass_kg: float
    total_mass_kg: float


class ActuatorMasses(_Section):
    motor_kg: float
    sun_gear_kg: float
    planet_gears_kg: float
    ring_gear_kg: float
    carrier_kg: float
    casing_kg: float
    backplate_kg: float
    coupling_kg: float
    bearings_kg: float
    total_kg: float


class ActuatorSection(_Section):
    kind: str
    motor_name: str
    sun_teeth_count: int
    planet_teeth_count: int
    ring_teeth_count: int
    planet_count: int
    module_mm: float
    gear_ratio: float
    peak_torque_Nm: float
    sun_pitch_diameter_mm: float
    planet_pitch_diameter_mm: float
    ring_pitch_diameter_mm: float
    ring_outer_diameter_mm: float
    planet_center_diameter_mm: float
    face_width_mm: float
    carrier_outer_diameter_mm: float
    carrier_inner_diameter_mm: float
    carrier_plate_thickness_mm: float
    casing_diameter_mm: float
    casing_length_mm: float
    casing_wall_mm: float
    backplate_diameter_mm: float
    backplate_thickness_mm: float
    sun_bearing_bore_mm: float
    output_bearing_bore_mm: float
    coupling_diameter_mm: float
    coupling_length_mm: float
    masses: ActuatorMasses


class ControllerSection(_Section):
    K_N_per_m: float
    C_Ns_per_m: float
    T_Nm_per_rad: float
    torsional_damping_Nms_per_rad: float
    rest_length_m: float
    rest_angle_rad: float


class DesignManifest(_Section):
    """Top-level manifest document."""

    schema_version: str = MANIFEST_SCHEMA_VERSION
    provenance: Provenance
    links: LinkSection
    body: BodySection
    actuators: Dict[str, ActuatorSection]  # "hip", "knee"
    controller: ControllerSection
