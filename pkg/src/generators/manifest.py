"""Stage 3: parametric design manifest for the optimized robot."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

from pydantic import ValidationError

from .. import __version__
from ..actuators.gearbox import gear_ratio
from ..actuators.mass_models import actuator_dimensions, actuator_mass, link_mass
from ..models.actuator import ActuatorCatalog, ActuatorDesign, MassBreakdown
from ..models.design import CodesignVariables
from ..models.manifest import (
    ActuatorMasses,
    ActuatorSection,
    BodySection,
    ControllerSection,
    DesignManifest,
    LinkSection,
    Provenance,
)
from ..models.robot import ControllerParams, RobotModel
from ..optim.codesign import decode
from ..utils.config import RunConfig, config_digest, format_validation_error
from .output_formats import actuator_summary

logger = logging.getLogger(__name__)

ROLES = ("hip", "knee")
MASS_TOLERANCE = 1e-12


class ManifestError(ValueError):
    """Inconsistent or malformed manifest; ``fields`` holds the offending paths."""

    def __init__(self, message: str, fields: List[str]):
        super().__init__(f"{message}: {', '.join(fields)}" if fields else message)
        self.fields = list(fields)


def _validation_fields(error: ValidationError, prefix: str = "") -> List[str]:
    paths = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"])
        paths.append(f"{prefix}{path}" if path else prefix.rstrip(".") or "<root>")
    return paths


def make_provenance(config: RunConfig, case: str) -> Provenance:
    return Provenance(
        config_sha256=config_digest(config),
        seed_id=config.seed,
        tool_version=__version__,
        case=case,
    )


def _actuator_section(design: ActuatorDesign, config: RunConfig) -> ActuatorSection:
    gt = design.gear_train
    dims = actuator_dimensions(gt, design.kind, design.motor, config.actuator_geometry)
    masses = {f"{name}_kg": getattr(design.breakdown, name) for name in MassBreakdown.COMPONENTS}
    return ActuatorSection(
        kind=design.kind.value,
        motor_name=design.motor.name,
        sun_teeth_count=gt.sun_teeth,
        planet_teeth_count=gt.planet_teeth,
        ring_teeth_count=gt.ring_teeth,
        planet_count=gt.planet_count,
        module_mm=gt.module,
        gear_ratio=design.ratio,
        peak_torque_Nm=design.peak_torque,
        sun_pitch_diameter_mm=dims.sun_pitch_diameter,
        planet_pitch_diameter_mm=dims.planet_pitch_diameter,
        ring_pitch_diameter_mm=dims.ring_pitch_diameter,
        ring_outer_diameter_mm=dims.ring_outer_diameter,
        planet_center_diameter_mm=dims.planet_center_diameter,
        face_width_mm=dims.face_width,
        carrier_outer_diameter_mm=dims.carrier_outer_diameter,
        carrier_inner_diameter_mm=dims.carrier_inner_diameter,
        carrier_plate_thickness_mm=dims.carrier_plate_thickness,
        casing_diameter_mm=dims.casing_diameter,
        casing_length_mm=dims.casing_length,
        casing_wall_mm=dims.casing_wall,
        backplate_diameter_mm=dims.backplate_diameter,
        backplate_thickness_mm=dims.backplate_thickness,
        sun_bearing_bore_mm=dims.sun_bore,
        output_bearing_bore_mm=dims.output_bore,
        coupling_diameter_mm=dims.coupling_diameter,
        coupling_length_mm=dims.coupling_length,
        masses=ActuatorMasses(total_kg=design.breakdown.total, **masses),
    )


def _consistency_errors(
    model: RobotModel,
    actuators: Mapping[str, ActuatorDesign],
    config: RunConfig,
) -> List[str]:
    """Field paths whose values disagree with a fresh recomputation."""
    fields = []
    for role in ROLES:
        design = actuators[role]
        prefix = f"actuators.{role}"
        if design.ratio != float(gear_ratio(design.gear_train)):
            fields.append(f"{prefix}.gear_ratio")
        fresh = actuator_mass(design.gear_train, design.kind, design.motor, config.materials,
                              config.actuator_geometry, config.gearbox_bounds)
        for name in MassBreakdown.COMPONENTS + ("total",):
            if abs(getattr(fresh, name) - getattr(design.breakdown, name)) > MASS_TOLERANCE:
                fields.append(f"{prefix}.masses.{name}_kg")
        if getattr(model, f"{role}_actuator_mass") != design.mass:
            fields.append(f"{prefix}.masses.total_kg")
        if getattr(model, f"{role}_peak_torque") != design.peak_torque:
            fields.append(f"{prefix}.peak_torque_Nm")

    for attr, length, field in (("m_l1", model.l1, "links.thigh_mass_kg"),
                                ("m_l2", model.l2, "links.shank_mass_kg")):
        if abs(getattr(model, attr) - link_mass(length, config.link_mass, config.materials)) > MASS_TOLERANCE:
            fields.append(field)
    return sorted(set(fields))


def build_manifest(
    model: RobotModel,
    params: ControllerParams,
    actuators: Mapping[str, ActuatorDesign],
    meta: Provenance,
    config: RunConfig,
) -> DesignManifest:
    """Assemble the manifest, recomputing every mass from the same inputs.

    Dimensions come from ``actuator_dimensions``, the routine the mass model
    uses, so the two cannot drift apart.

    Raises:
        ManifestError: If a recorded mass, ratio or torque disagrees with recomputation
    """
    missing = [f"actuators.{role}" for role in ROLES if role not in actuators]
    if missing:
        raise ManifestError("missing actuators", missing)
    mismatched = _consistency_errors(model, actuators, config)
    if mismatched:
        raise ManifestError("design is inconsistent with the mass models", mismatched)

    return DesignManifest(
        provenance=meta,
        links=LinkSection(
            thigh_length_m=model.l1,
            shank_length_m=model.l2,
            thigh_mass_kg=model.m_l1,
            shank_mass_kg=model.m_l2,
        ),
        body=BodySection(base_mass_kg=model.base_mass, total_mass_kg=model.total_mass),
        actuators={role: _actuator_section(actuators[role], config) for role in ROLES},
        controller=ControllerSection(
            K_N_per_m=params.K,
            C_Ns_per_m=params.C,
            T_Nm_per_rad=params.T,
            torsional_damping_Nms_per_rad=params.torsional_damping,
            rest_length_m=params.l0,
            rest_angle_rad=params.alpha0,
        ),
    )


def manifest_text(manifest: DesignManifest) -> str:
    return json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: DesignManifest, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(manifest_text(manifest))
    logger.info(f"Manifest written to {path}")
    return path


def read_manifest(path: Path) -> DesignManifest:
    """Load and validate a manifest.

    Raises:
        FileNotFoundError: If the file does not exist
        ManifestError: If the file is not JSON or violates the schema
    """
    with open(path, "r") as f:
        text = f.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path} is not valid JSON ({e.msg} at line {e.lineno})", ["<root>"])
    try:
        return DesignManifest.model_validate(payload)
    except ValidationError as e:
        raise ManifestError(f"{path} violates the manifest schema:\n{format_validation_error(e)}",
                            _validation_fields(e))


def manifest_schema() -> Dict[str, Any]:
    return DesignManifest.model_json_schema()


def write_manifest_schema(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(json.dumps(manifest_schema(), sort_keys=True, indent=2) + "\n")
    return path


def _recorded_mismatches(role: str, recorded: Any, fresh: Dict[str, Any]) -> List[str]:
    prefix = f"actuators.{role}"
    if not isinstance(recorded, dict):
        return [prefix]
    fields = []
    for key, value in fresh.items():
        if isinstance(value, dict):
            inner = recorded.get(key)
            if not isinstance(inner, dict):
                fields.append(f"{prefix}.{key}")
                continue
            fields.extend(f"{prefix}.{key}.{k}" for k, v in value.items() if inner.get(k) != v)
        elif isinstance(value, float):
            stored = recorded.get(key)
            if not isinstance(stored, (int, float)) or not math.isclose(stored, value, rel_tol=0.0,
                                                                        abs_tol=MASS_TOLERANCE):
                fields.append(f"{prefix}.{key}")
        elif recorded.get(key) != value:
            fields.append(f"{prefix}.{key}")
    return fields


def manifest_from_best_point(
    payload: Mapping[str, Any],
    catalog: ActuatorCatalog,
    config: RunConfig,
) -> Tuple[DesignManifest, RobotModel, ControllerParams]:
    """Rebuild the design behind a co-design best-point file and export it.

    The point is decoded again through the catalog; actuator fields recorded
    in the file must match the decoded ones.

    Raises:
        ManifestError: If the file is malformed or its recorded actuators disagree
    """
    try:
        y = CodesignVariables.model_validate(payload.get("variables"))
    except ValidationError as e:
        raise ManifestError("best-point variables are invalid", _validation_fields(e, "variables."))

    try:
        model, params, actuators = decode(y, catalog, config)
    except (LookupError, ValueError) as e:
        raise ManifestError(f"best point does not decode: {e}", ["variables"])

    recorded = payload.get("actuators") or {}
    mismatched = []
    for role in ROLES:
        mismatched.extend(_recorded_mismatches(role, recorded.get(role), actuator_summary(actuators[role])))
    if mismatched:
        raise ManifestError("best-point actuators disagree with recomputation", mismatched)

    case = (payload.get("case") or {}).get("name", config.case.name)
    recorded_digest = (payload.get("provenance") or {}).get("config_sha256")
    meta = make_provenance(config, case)
    if recorded_digest and recorded_digest != meta.config_sha256:
        logger.warning("best point was produced under a different configuration")
    return build_manifest(model, params, actuators, meta, config), model, params
