"""CSV and JSON artifact writers.

Everything written here is a pure function of its inputs: no timestamps, sorted
JSON keys, fixed CSV column order. Re-running a command rewrites identical bytes.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set

from ..models.actuator import ActuatorCatalog, ActuatorDesign, MassBreakdown
from ..models.robot import TRACE_COLUMNS, JumpResult

CATALOG_COLUMNS = ("ratio_lo", "ratio_hi", "kind", "mass_kg", "peak_torque_Nm",
                   "Ns", "Np", "Nr", "module_mm", "n_p")
HISTORY_COLUMNS = ("gen", "best_cost", "median_cost", "sigma", "best_h", "best_E")
MASS_REPORT_COLUMNS = (("kind", "Ns", "Np", "Nr", "module_mm", "n_p", "ratio")
                       + tuple(f"{name}_kg" for name in MassBreakdown.COMPONENTS) + ("total_kg",))


def finite_or_none(value: Any) -> Any:
    """JSON has no NaN or infinity; map them to null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _clean(payload: Any) -> Any:
    if isinstance(payload, dict):
        return {k: _clean(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_clean(v) for v in payload]
    return finite_or_none(payload)


def dumps(payload: Any) -> str:
    return json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"


def catalog_row(entry_lo: float, entry_hi: float, design: ActuatorDesign) -> List[Any]:
    gt = design.gear_train
    return [entry_lo, entry_hi, design.kind.value, design.mass, design.peak_torque,
            gt.sun_teeth, gt.planet_teeth, gt.ring_teeth, gt.module, gt.planet_count]


def mass_report_row(design: ActuatorDesign) -> List[Any]:
    gt = design.gear_train
    parts = [getattr(design.breakdown, name) for name in MassBreakdown.COMPONENTS]
    return ([design.kind.value, gt.sun_teeth, gt.planet_teeth, gt.ring_teeth, gt.module,
             gt.planet_count, design.ratio] + parts + [design.breakdown.total])


def actuator_summary(design: ActuatorDesign) -> Dict[str, Any]:
    gt = design.gear_train
    return {
        "kind": design.kind.value,
        "gear_train": {
            "sun_teeth_count": gt.sun_teeth,
            "planet_teeth_count": gt.planet_teeth,
            "ring_teeth_count": gt.ring_teeth,
            "module_mm": gt.module,
            "planet_count": gt.planet_count,
        },
        "gear_ratio": design.ratio,
        "mass_kg": design.mass,
        "peak_torque_Nm": design.peak_torque,
    }


def evaluation_summary(evaluation) -> Dict[str, Any]:
    return {
        "cost": evaluation.cost,
        "apex_height_m": evaluation.apex_height,
        "energy_J": evaluation.energy,
        "feasible": evaluation.feasible,
        "reason": evaluation.reason,
    }


def best_point_payload(result, actuators: Dict[str, ActuatorDesign], provenance) -> Dict[str, Any]:
    """Everything ``export`` needs to rebuild and cross-check the optimized design.

    Args:
        result: Finished co-design run
        actuators: Decoded hip and knee actuators of the best point
        provenance: Config digest, seed, tool version and case
    """
    payload = {
        "provenance": provenance.model_dump(mode="json"),
        "case": {"name": result.case.name, "free": result.case.free, "frozen": dict(result.case.frozen)},
        "variables": result.best.model_dump(),
        "actuators": {role: actuator_summary(design) for role, design in sorted(actuators.items())},
        "generations": len(result.history),
        "evaluations": result.evaluations,
    }
    payload.update(evaluation_summary(result.evaluation))
    if result.audit is not None:
        payload["penalty_audit"] = {
            "max_feasible_cost": result.audit.max_feasible_cost,
            "infeasible_penalty": result.audit.infeasible_penalty,
            "ok": result.audit.ok,
        }
    return payload


class ArtifactWriter:
    """Writes run artifacts under one output directory."""

    def __init__(self, output_dir: Optional[Path] = None):
        """Initialize writer.

        Args:
            output_dir: Output directory
        """
        self.logger = logging.getLogger(__name__)

        if output_dir is None:
            output_dir = Path("./output")

        self.output_dir = Path(output_dir)
        # Names (relative to output_dir) written through this writer
        self.written: Set[str] = set()

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def record(self, name: str) -> Path:
        """Register a file written outside this writer, e.g. the manifest."""
        self.written.add(name)
        return self.path(name)

    def _open(self, name: str):
        self.written.add(name)
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        return open(target, "w", newline="")

    def write_json(self, name: str, payload: Any) -> Path:
        with self._open(name) as f:
            f.write(dumps(payload))
        self.logger.debug(f"wrote {self.path(name)}")
        return self.path(name)

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        with self._open(name) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow(row)
        self.logger.debug(f"wrote {self.path(name)}")
        return self.path(name)

    def write_catalog(self, catalog: ActuatorCatalog, stem: str = "catalog") -> List[Path]:
        """Catalog JSON, best-per-bin CSV and per-kind CSV."""
        json_path = self.path(f"{stem}.json")
        with self._open(f"{stem}.json") as f:
            f.write(json.dumps(catalog.model_dump(mode="json"), sort_keys=True, indent=2) + "\n")

        best_rows = [catalog_row(e.bin.lo, e.bin.hi, e.best) for e in catalog.non_empty()]
        per_kind_rows = []
        for entry in catalog.bins:
            for design in (entry.best_isspg, entry.best_esspg):
                if design is not None:
                    per_kind_rows.append(catalog_row(entry.bin.lo, entry.bin.hi, design))

        paths = [
            json_path,
            self.write_csv(f"{stem}.csv", CATALOG_COLUMNS, best_rows),
            self.write_csv(f"{stem}_by_kind.csv", CATALOG_COLUMNS, per_kind_rows),
        ]
        self.logger.info(f"Catalog written: {len(best_rows)} bins to {paths[1]}")
        return paths

    def write_mass_report(self, designs: Iterable[ActuatorDesign], name: str = "mass_report.csv") -> Path:
        return self.write_csv(name, MASS_REPORT_COLUMNS, (mass_report_row(d) for d in designs))

    def write_trajectory(self, jump: JumpResult, name: str = "trajectory.csv") -> Path:
        columns = [jump.trace.get(column, []) for column in TRACE_COLUMNS]
        rows = zip(*[[v if isinstance(v, str) else float(v) for v in column] for column in columns])
        return self.write_csv(name, TRACE_COLUMNS, rows)

    def write_history(self, history, name: str = "history.csv") -> Path:
        rows = ([h.generation, h.best_cost, h.median_cost, h.sigma, h.best_h, h.best_E]
                for h in history)
        return self.write_csv(name, HISTORY_COLUMNS, rows)


def read_json(path: Path) -> Any:
    with open(path, "r") as f:
        return json.load(f)
