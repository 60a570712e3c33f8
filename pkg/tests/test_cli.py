import csv
import json

import pytest
from click.testing import CliRunner

from src.cli import EXIT_CONFIG, EXIT_RUNTIME, cli
from src.models.robot import TRACE_COLUMNS


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "ratio_grid": {"lo": 5.9, "hi": 6.2, "step": 0.1},
        "codesign_bounds": {"g_min": 6.0, "g_max": 6.1},
        "cmaes": {"population": 4, "max_generations": 2},
        "jobs": 1,
        "logging": {"level": "WARNING"},
    }))
    return path


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def invoke(runner, config_file, out_dir):
    def run(*args):
        return runner.invoke(cli, ["--config", str(config_file), "--out", str(out_dir), *args])
    return run


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_stage1_writes_catalog(invoke, out_dir):
    result = invoke("stage1")
    assert result.exit_code == 0, result.output
    rows = read_rows(out_dir / "catalog.csv")
    assert rows[0][:3] == ["ratio_lo", "ratio_hi", "kind"]
    assert len(rows) == 4
    first = (out_dir / "catalog.csv").read_bytes()

    again = invoke("stage1")
    assert again.exit_code == 0, again.output
    assert (out_dir / "catalog.csv").read_bytes() == first
    assert (out_dir / "cache" / "catalog-latest.json").exists()


def test_stage1_single_kind(invoke, out_dir):
    result = invoke("stage1", "--kind", "isspg")
    assert result.exit_code == 0, result.output
    kinds = {row[2] for row in read_rows(out_dir / "catalog_by_kind.csv")[1:]}
    assert kinds == {"isspg"}


def test_stage1_both_kinds_explicit(invoke, out_dir):
    result = invoke("stage1", "--kind", "both")
    assert result.exit_code == 0, result.output
    kinds = {row[2] for row in read_rows(out_dir / "catalog_by_kind.csv")[1:]}
    assert "isspg" in kinds


def test_mass_report_for_one_train(invoke, out_dir):
    result = invoke("mass-report", "--teeth", "18,36,90", "--module", "0.5", "--planets", "3")
    assert result.exit_code == 0, result.output
    rows = read_rows(out_dir / "mass_report.csv")
    assert rows[0][-1] == "total_kg"
    assert [row[0] for row in rows[1:]] == ["isspg", "esspg"]


def test_mass_report_needs_module_and_planets(invoke):
    result = invoke("mass-report", "--teeth", "18,36,90")
    assert result.exit_code != 0


def test_simulate_nominal(invoke, out_dir):
    result = invoke("simulate")
    assert result.exit_code == 0, result.output
    rows = read_rows(out_dir / "trajectory.csv")
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) > 10


def test_simulate_explicit_point(invoke, out_dir):
    result = invoke("simulate", "--y", "0.4,0.4,6.0,6.0,50,2.5,10")
    assert result.exit_code == 0, result.output
    assert (out_dir / "trajectory.csv").exists()


def test_simulate_rejects_short_point(invoke):
    result = invoke("simulate", "--y", "0.4,0.4,6.0")
    assert result.exit_code != 0
    assert "expected 7 values" in result.output


def test_codesign_then_export(invoke, out_dir):
    result = invoke("codesign")
    assert result.exit_code == 0, result.output

    point = json.loads((out_dir / "best_point.json").read_text())
    assert point["case"]["name"] == "c"
    assert point["generations"] == 2
    assert point["evaluations"] == 8
    history = read_rows(out_dir / "history.csv")
    best = [float(row[1]) for row in history[1:]]
    assert len(best) == 2 and best[1] <= best[0]

    exported = invoke("export")
    assert exported.exit_code == 0, exported.output
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["links"]["thigh_length_m"] == point["variables"]["l1"]
    assert manifest["provenance"]["case"] == "c"


def test_export_rejects_tampered_point(invoke, out_dir, tmp_path):
    assert invoke("codesign").exit_code == 0
    point = json.loads((out_dir / "best_point.json").read_text())
    point["actuators"]["knee"]["mass_kg"] *= 1.01
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(point))

    result = invoke("export", "--point", str(tampered))
    assert result.exit_code == EXIT_RUNTIME
    assert "actuators.knee.mass_kg" in result.output


def test_export_schema_only(invoke, tmp_path):
    schema = tmp_path / "manifest.schema.json"
    result = invoke("export", "--schema", str(schema))
    assert result.exit_code == 0, result.output
    assert "properties" in json.loads(schema.read_text())


def snapshot(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pipeline_writes_summary(invoke, out_dir):
    out_dir.mkdir()
    (out_dir / "notes.txt").write_text("left by hand")

    result = invoke("pipeline")
    assert result.exit_code == 0, result.output
    summary = json.loads((out_dir / "summary.json").read_text())
    assert "cached" not in summary["stage1"]
    assert summary["stage1"]["bins"] == 3
    assert summary["nominal"]["variables"]["g_k"] == 6.0
    assert {"manifest.json", "best_point.json", "trajectory_nominal.csv", "summary.json"} <= set(
        summary["artifacts"])
    assert "notes.txt" not in summary["artifacts"]
    first = snapshot(out_dir)

    rerun = invoke("pipeline")
    assert rerun.exit_code == 0, rerun.output
    assert "reused from cache" in rerun.output
    assert snapshot(out_dir) == first


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(cli, ["--config", str(tmp_path / "missing.json"), "stage1"])
    assert result.exit_code == EXIT_CONFIG
    assert "not found" in result.output


def test_invalid_config_file(runner, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"sim": {"dt": 0}}))
    result = runner.invoke(cli, ["--config", str(path), "stage1"])
    assert result.exit_code == EXIT_CONFIG
    assert "sim.dt" in result.output
