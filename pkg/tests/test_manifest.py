import json
import logging

import pytest

from src.actuators.mass_models import actuator_mass
from src.generators.manifest import (
    ManifestError,
    build_manifest,
    make_provenance,
    manifest_from_best_point,
    manifest_schema,
    read_manifest,
    write_manifest,
    write_manifest_schema,
)
from src.generators.output_formats import actuator_summary
from src.models.design import CodesignVariables
from src.models.manifest import UNIT_SUFFIXES
from src.optim.codesign import decode

NOMINAL = CodesignVariables.nominal()
TEXT_KEYS = {"schema_version", "config_sha256", "tool_version", "case", "kind", "motor_name"}


@pytest.fixture
def nominal_design(catalog, codesign_config):
    return decode(NOMINAL, catalog, codesign_config)


@pytest.fixture
def manifest(nominal_design, codesign_config):
    model, params, actuators = nominal_design
    return build_manifest(model, params, actuators, make_provenance(codesign_config, "nominal"), codesign_config)


@pytest.fixture
def point_payload(nominal_design, codesign_config):
    _, _, actuators = nominal_design
    return {
        "provenance": make_provenance(codesign_config, "nominal").model_dump(),
        "case": {"name": "nominal", "free": [], "frozen": NOMINAL.model_dump()},
        "variables": NOMINAL.model_dump(),
        "actuators": {role: actuator_summary(design) for role, design in actuators.items()},
    }


def numeric_keys(node, path=""):
    for key, value in node.items():
        here = f"{path}.{key}" if path else key
        if isinstance(value, dict):
            yield from numeric_keys(value, here)
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            yield here, key


def test_nominal_gear_dimensions(manifest):
    hip = manifest.actuators["hip"]
    assert hip.kind == "isspg"
    assert hip.sun_pitch_diameter_mm == hip.module_mm * hip.sun_teeth_count
    assert hip.ring_pitch_diameter_mm == pytest.approx(45.0)
    assert hip.gear_ratio == pytest.approx(6.0)
    assert hip.casing_diameter_mm == 60.0


def test_manifest_masses_match_a_fresh_computation(manifest, nominal_design, codesign_config):
    _, _, actuators = nominal_design
    for role, design in actuators.items():
        fresh = actuator_mass(design.gear_train, design.kind, design.motor, codesign_config.materials,
                              codesign_config.actuator_geometry)
        masses = manifest.actuators[role].masses
        assert masses.total_kg == fresh.total
        assert masses.bearings_kg == fresh.bearings
    assert manifest.links.thigh_mass_kg == pytest.approx(0.4184)
    assert manifest.body.total_mass_kg == pytest.approx(
        manifest.body.base_mass_kg + manifest.links.thigh_mass_kg + manifest.links.shank_mass_kg
        + manifest.actuators["hip"].masses.total_kg + manifest.actuators["knee"].masses.total_kg)


def test_manifest_controller_section(manifest):
    assert manifest.controller.K_N_per_m == 50.0
    assert manifest.controller.rest_length_m == pytest.approx(0.72)
    assert manifest.provenance.case == "nominal"
    assert manifest.provenance.seed_id == 0


def test_every_number_carries_a_unit(manifest):
    keys = list(numeric_keys(manifest.model_dump(mode="json")))
    assert keys
    for path, key in keys:
        assert key.endswith(UNIT_SUFFIXES), path
    assert TEXT_KEYS.isdisjoint(key for _, key in keys)


def test_round_trip_is_byte_identical(manifest, tmp_path):
    path = write_manifest(manifest, tmp_path / "manifest.json")
    loaded = read_manifest(path)
    assert loaded == manifest

    again = write_manifest(loaded, tmp_path / "again.json")
    assert again.read_bytes() == path.read_bytes()


def test_malformed_json_is_reported(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ManifestError) as excinfo:
        read_manifest(path)
    assert excinfo.value.fields == ["<root>"]


def test_missing_key_names_its_path(manifest, tmp_path):
    payload = manifest.model_dump(mode="json")
    del payload["links"]["thigh_length_m"]
    payload["actuators"]["knee"]["module_mm"] = "wide"
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(payload))

    with pytest.raises(ManifestError) as excinfo:
        read_manifest(path)
    assert "links.thigh_length_m" in excinfo.value.fields
    assert "actuators.knee.module_mm" in excinfo.value.fields


def test_missing_manifest_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_manifest(tmp_path / "nope.json")


def test_model_mass_mismatch_is_rejected(nominal_design, codesign_config):
    model, params, actuators = nominal_design
    wrong = model.model_copy(update={"hip_actuator_mass": model.hip_actuator_mass + 0.01})
    with pytest.raises(ManifestError) as excinfo:
        build_manifest(wrong, params, actuators, make_provenance(codesign_config, "nominal"), codesign_config)
    assert excinfo.value.fields == ["actuators.hip.masses.total_kg"]


def test_link_mass_mismatch_is_rejected(nominal_design, codesign_config):
    model, params, actuators = nominal_design
    wrong = model.model_copy(update={"m_l2": 0.5})
    with pytest.raises(ManifestError) as excinfo:
        build_manifest(wrong, params, actuators, make_provenance(codesign_config, "nominal"), codesign_config)
    assert excinfo.value.fields == ["links.shank_mass_kg"]


def test_missing_actuator_is_rejected(nominal_design, codesign_config):
    model, params, actuators = nominal_design
    with pytest.raises(ManifestError) as excinfo:
        build_manifest(model, params, {"hip": actuators["hip"]}, make_provenance(codesign_config, "nominal"),
                       codesign_config)
    assert excinfo.value.fields == ["actuators.knee"]


def test_best_point_export(point_payload, catalog, codesign_config, manifest):
    exported, model, params = manifest_from_best_point(point_payload, catalog, codesign_config)
    assert exported == manifest
    assert params.K == 50.0
    assert model.l1 == 0.4


def test_tampered_actuator_mass_is_rejected(point_payload, catalog, codesign_config):
    point_payload["actuators"]["hip"]["mass_kg"] += 0.001
    with pytest.raises(ManifestError) as excinfo:
        manifest_from_best_point(point_payload, catalog, codesign_config)
    assert excinfo.value.fields == ["actuators.hip.mass_kg"]


def test_tampered_teeth_are_rejected(point_payload, catalog, codesign_config):
    point_payload["actuators"]["knee"]["gear_train"]["sun_teeth_count"] = 19
    with pytest.raises(ManifestError) as excinfo:
        manifest_from_best_point(point_payload, catalog, codesign_config)
    assert excinfo.value.fields == ["actuators.knee.gear_train.sun_teeth_count"]


def test_invalid_variables_are_rejected(point_payload, catalog, codesign_config):
    del point_payload["variables"]["T"]
    with pytest.raises(ManifestError) as excinfo:
        manifest_from_best_point(point_payload, catalog, codesign_config)
    assert excinfo.value.fields == ["variables.T"]


def test_undecodable_point_is_rejected(point_payload, catalog, codesign_config):
    point_payload["variables"]["g_k"] = 9.5
    with pytest.raises(ManifestError) as excinfo:
        manifest_from_best_point(point_payload, catalog, codesign_config)
    assert excinfo.value.fields == ["variables"]


def test_foreign_config_digest_only_warns(point_payload, catalog, codesign_config, caplog):
    point_payload["provenance"]["config_sha256"] = "0" * 64
    with caplog.at_level(logging.WARNING):
        manifest_from_best_point(point_payload, catalog, codesign_config)
    assert "different configuration" in caplog.text


def test_mixed_kind_design(catalog, codesign_config):
    y = NOMINAL.model_copy(update={"g_h": 5.0, "g_k": 7.9})
    model, params, actuators = decode(y, catalog, codesign_config)
    manifest = build_manifest(model, params, actuators, make_provenance(codesign_config, "c"), codesign_config)
    assert manifest.actuators["hip"].kind == "isspg"
    assert manifest.actuators["knee"].kind == "esspg"
    assert manifest.actuators["knee"].casing_diameter_mm == codesign_config.motor.outer_diameter


def test_schema_lists_every_section(tmp_path):
    schema = manifest_schema()
    assert set(schema["required"]) >= {"provenance", "links", "body", "actuators", "controller"}
    path = write_manifest_schema(tmp_path / "schema" / "manifest.schema.json")
    assert json.loads(path.read_text()) == schema
