"""Runs the three stages in sequence and keeps the Stage-1 catalog cache."""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

from pydantic import ValidationError

from .actuators.stage1 import CatalogBuilder
from .generators.manifest import make_provenance, manifest_from_best_point, write_manifest
from .generators.output_formats import (
    ArtifactWriter,
    actuator_summary,
    best_point_payload,
    evaluation_summary,
    read_json,
)
from .models.actuator import ActuatorCatalog
from .models.design import CaseSpec, CodesignVariables
from .models.gearing import GearboxKind
from .optim.codesign import (
    CodesignGeneration,
    CodesignOptimizer,
    CodesignResult,
    Evaluation,
    decode,
    evaluate,
)
from .utils.config import RunConfig, stage1_cache_key

BEST_POINT = "best_point.json"
MANIFEST = "manifest.json"
SUMMARY = "summary.json"


class CatalogCache:
    """Stores the latest Stage-1 catalog next to the key it was built under."""

    def __init__(self, cache_dir: Path):
        """Initialize cache.

        Args:
            cache_dir: Directory holding the cached catalog
        """
        self.logger = logging.getLogger(__name__)
        self.cache_dir = Path(cache_dir)
        self.path = self.cache_dir / "catalog-latest.json"

    def load(self, key: str) -> Optional[ActuatorCatalog]:
        """Cached catalog if its key matches, else None."""
        if not self.path.exists():
            return None
        try:
            with open(self.path, "r") as f:
                stored = json.load(f)
            if stored.get("key") != key:
                self.logger.info("Stage-1 inputs changed since the cached catalog was built")
                return None
            return ActuatorCatalog.model_validate(stored["catalog"])
        except (OSError, ValueError, KeyError, ValidationError) as e:
            self.logger.warning(f"Ignoring unreadable catalog cache {self.path}: {e}")
            return None

    def save(self, catalog: ActuatorCatalog, key: str) -> Path:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w") as f:
            json.dump({"key": key, "catalog": catalog.model_dump(mode="json")}, f, sort_keys=True, indent=2)
            f.write("\n")
        self.logger.debug(f"Catalog cached at {self.path}")
        return self.path


class PipelineOrchestrator:
    """Coordinates actuator search, co-design and export for one run configuration."""

    def __init__(self, config: RunConfig, output_dir: Optional[Path] = None):
        """Initialize orchestrator.

        Args:
            config: Run configuration
            output_dir: Overrides ``config.output_dir``
        """
        self.config = config
        self.output_dir = Path(output_dir or config.output_dir)
        self.writer = ArtifactWriter(self.output_dir)
        self.cache = CatalogCache(self.output_dir / "cache")
        self.stage1_cached = False
        self.logger = logging.getLogger(__name__)

    # Stage 1

    def stage1(
        self,
        kinds: Optional[Iterable[GearboxKind]] = None,
        progress: Optional[Callable[[int], None]] = None,
        use_cache: bool = True,
    ) -> Tuple[ActuatorCatalog, bool]:
        """Build (or reuse) the catalog and write its artifacts.

        Returns:
            (catalog, whether it came from the cache)
        """
        kinds = sorted(set(kinds or (GearboxKind.ISSPG, GearboxKind.ESSPG)), key=lambda k: k.value)
        key = stage1_cache_key(self.config, [k.value for k in kinds])

        catalog = self.cache.load(key) if use_cache else None
        cached = catalog is not None
        if cached:
            self.logger.info("Stage 1 skipped: catalog inputs unchanged")
        else:
            builder = CatalogBuilder(
                motor=self.config.motor,
                bounds=self.config.gearbox_bounds,
                grid=self.config.ratio_grid,
                materials=self.config.materials,
                geometry=self.config.actuator_geometry,
                kinds=kinds,
                jobs=self.config.jobs,
            )
            catalog = builder.build(progress)
            self.cache.save(catalog, key)
        self.stage1_cached = cached

        self.writer.write_catalog(catalog)
        return catalog, cached

    def catalog(self) -> ActuatorCatalog:
        """Full two-kind catalog, built on demand."""
        return self.stage1()[0]

    # Stage 2

    def simulate(
        self,
        y: CodesignVariables,
        catalog: Optional[ActuatorCatalog] = None,
        trajectory_name: str = "trajectory.csv",
    ) -> Evaluation:
        """Evaluate one design point and write its trajectory."""
        catalog = catalog or self.catalog()
        evaluation, jump = evaluate(y, catalog, self.config, record_trace=True)
        if jump is not None:
            self.writer.write_trajectory(jump, trajectory_name)
        else:
            self.logger.warning(f"No trajectory for the point: {evaluation.reason} ({evaluation.detail})")
        return evaluation

    def codesign(
        self,
        case: Optional[CaseSpec] = None,
        catalog: Optional[ActuatorCatalog] = None,
        progress: Optional[Callable[[CodesignGeneration], None]] = None,
    ) -> Tuple[CodesignResult, Dict[str, Any]]:
        """Optimize one case; writes the best point, history and best trajectory."""
        catalog = catalog or self.catalog()
        case = case or self.config.case
        result = CodesignOptimizer(catalog, self.config, self.config.jobs).optimize_case(case, progress)

        try:
            _, _, actuators = decode(result.best, catalog, self.config)
        except (LookupError, ValueError) as e:
            self.logger.warning(f"Best point is infeasible: {e}")
            actuators = {}

        payload = best_point_payload(result, actuators, make_provenance(self.config, result.case.name))
        self.writer.write_json(BEST_POINT, payload)
        self.writer.write_history(result.history)
        if result.jump is not None:
            self.writer.write_trajectory(result.jump)
        return result, payload

    # Stage 3

    def export(
        self,
        point_path: Optional[Path] = None,
        catalog: Optional[ActuatorCatalog] = None,
        payload: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """Write the manifest for a best-point file (or an in-memory payload)."""
        if payload is None:
            payload = read_json(Path(point_path or self.writer.path(BEST_POINT)))
        catalog = catalog or self.catalog()
        manifest, _, _ = manifest_from_best_point(payload, catalog, self.config)
        return write_manifest(manifest, self.writer.record(MANIFEST))

    # All stages

    def run(
        self,
        case: Optional[CaseSpec] = None,
        stage1_progress: Optional[Callable[[int], None]] = None,
        codesign_progress: Optional[Callable[[CodesignGeneration], None]] = None,
    ) -> Dict[str, Any]:
        """stage1, nominal evaluation, co-design, export, then ``summary.json``.

        The first failing stage aborts the run with its exception.
        """
        self.logger.info(f"Pipeline started, output in {self.output_dir}")
        catalog, cached = self.stage1(progress=stage1_progress)

        nominal_y = CodesignVariables.nominal()
        nominal = self.simulate(nominal_y, catalog, trajectory_name="trajectory_nominal.csv")
        self.logger.info(f"Nominal point: h {nominal.apex_height:.3f} m, E {nominal.energy:.3f} J")

        result, payload = self.codesign(case, catalog, codesign_progress)
        manifest_path = self.export(catalog=catalog, payload=payload)

        if cached:
            self.logger.info("Pipeline reused the cached Stage-1 catalog")
        summary = self._summary(catalog, nominal_y, nominal, result, payload)
        self.writer.write_json(SUMMARY, summary)
        self.logger.info(f"Pipeline complete: {self.writer.path(SUMMARY)}")
        self.logger.debug(f"Manifest at {manifest_path}")
        return summary

    def _summary(
        self,
        catalog: ActuatorCatalog,
        nominal_y: CodesignVariables,
        nominal: Evaluation,
        result: CodesignResult,
        payload: Dict[str, Any],
    ) -> Dict[str, Any]:
        nominal_actuators: Dict[str, Any] = {}
        try:
            _, _, designs = decode(nominal_y, catalog, self.config)
            nominal_actuators = {role: actuator_summary(d) for role, d in sorted(designs.items())}
        except (LookupError, ValueError) as e:
            self.logger.warning(f"Nominal point has no actuators: {e}")

        # Run status such as cache reuse stays out of the file so reruns are byte-identical
        artifacts = sorted(self.writer.written | {SUMMARY})
        return {
            "provenance": payload["provenance"],
            "stage1": {
                "bins": len(catalog.bins),
                "feasible_bins": len(catalog.non_empty()),
                "kinds": [k.value for k in catalog.kinds],
            },
            "nominal": {
                "variables": nominal_y.model_dump(),
                "actuators": nominal_actuators,
                **evaluation_summary(nominal),
            },
            "optimized": {
                "variables": payload["variables"],
                "actuators": payload["actuators"],
                **evaluation_summary(result.evaluation),
            },
            "artifacts": artifacts,
        }
