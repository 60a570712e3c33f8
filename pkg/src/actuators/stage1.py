"""Stage 1: sweep gear-ratio bins and keep the lightest actuator in each."""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Optional, Sequence

from ..models.actuator import (
    ActuatorCatalog,
    ActuatorDesign,
    ActuatorGeometry,
    CatalogBin,
    MaterialTable,
    RatioBin,
    RatioGrid,
)
from ..models.gearing import GearboxBounds, GearboxKind, GearTrain, MotorSpec, exact
from .gearbox import check_interference, check_meshing, diameter_limit, validate
from ..utils.logging_config import setup_worker_logging
from .mass_models import make_actuator

KIND_ORDER = {GearboxKind.ISSPG: 0, GearboxKind.ESSPG: 1}


class NoFeasibleActuatorError(LookupError):
    """No catalog entry exists for the requested gear ratio."""

    def __init__(self, ratio: float, reason: str = ""):
        message = f"no feasible actuator at ratio {ratio:g}"
        if reason:
            message = f"{message} ({reason})"
        super().__init__(message)
        self.ratio = ratio


def selection_key(design: ActuatorDesign):
    """Lightest first; ties go to lower ratio, then ISSPG, then lexicographic teeth."""
    # Planet count only breaks exact ties; at equal teeth and module each extra
    # planet adds mass, so a two-planet train wins wherever it clears interference.
    return (design.mass, design.exact_ratio, KIND_ORDER[design.kind], design.gear_train.sort_key)


def _candidate_trains(kind: GearboxKind, motor: MotorSpec, window: GearboxBounds) -> Iterator[GearTrain]:
    """Trains with Nr = Ns + 2 Np whose ratio can land in the window.

    Tooth-count caps follow from the ring diameter bound, so the loops are
    finite without arbitrary limits.
    """
    limit = diameter_limit(kind, motor, window.delta_clr)
    lo, hi = exact(window.gr_min), exact(window.gr_max)
    n_min = window.N_min
    modules = sorted({m for m in window.modules if window.m_min <= m <= window.m_max})

    for module in modules:
        ring_max = math.floor(limit / exact(module))
        sun_max = ring_max - 2 * n_min
        if window.max_teeth is not None:
            sun_max = min(sun_max, window.max_teeth)
        for ns in range(n_min, sun_max + 1):
            # ratio = 2 + 2 Np / Ns
            np_lo = max(n_min, math.ceil((lo - 2) * ns / 2))
            np_hi = min((ring_max - ns) // 2, math.floor((hi - 2) * ns / 2))
            if window.max_teeth is not None:
                np_hi = min(np_hi, window.max_teeth)
            for np_ in range(np_lo, np_hi + 1):
                for planets in range(window.n_p_min, window.n_p_max + 1):
                    yield GearTrain(
                        sun_teeth=ns,
                        planet_teeth=np_,
                        ring_teeth=ns + 2 * np_,
                        module=module,
                        planet_count=planets,
                    )


def enumerate_feasible(
    kind: GearboxKind,
    motor: MotorSpec,
    bounds: GearboxBounds,
    ratio_bin: RatioBin,
    materials: Optional[MaterialTable] = None,
    geometry: Optional[ActuatorGeometry] = None,
) -> List[ActuatorDesign]:
    """Every feasible actuator of one kind whose ratio falls in ``ratio_bin``.

    Returns:
        Designs sorted by ``selection_key``; empty when the bin is infeasible
    """
    materials = materials or MaterialTable()
    window = bounds.with_ratio_window(ratio_bin.lo, ratio_bin.hi, inclusive=ratio_bin.closed_upper)
    designs = []
    for gt in _candidate_trains(kind, motor, window):
        # cheap integer and float checks first
        if not check_meshing(gt).passed or not check_interference(gt, window.delta_p).passed:
            continue
        if not validate(gt, kind, motor, window).feasible:
            continue
        designs.append(make_actuator(gt, kind, motor, materials, geometry, window))
    designs.sort(key=selection_key)
    return designs


def evaluate_bin(
    ratio_bin: RatioBin,
    kinds: Sequence[GearboxKind],
    motor: MotorSpec,
    bounds: GearboxBounds,
    materials: MaterialTable,
    geometry: ActuatorGeometry,
) -> CatalogBin:
    """Best design per kind and overall for one bin."""
    per_kind = {}
    counts = {}
    for kind in kinds:
        designs = enumerate_feasible(kind, motor, bounds, ratio_bin, materials, geometry)
        per_kind[kind] = designs[0] if designs else None
        counts[kind] = len(designs)

    finalists = [d for d in per_kind.values() if d is not None]
    return CatalogBin(
        bin=ratio_bin,
        best=min(finalists, key=selection_key) if finalists else None,
        best_isspg=per_kind.get(GearboxKind.ISSPG),
        best_esspg=per_kind.get(GearboxKind.ESSPG),
        feasible_isspg=counts.get(GearboxKind.ISSPG, 0),
        feasible_esspg=counts.get(GearboxKind.ESSPG, 0),
    )


# Per-process state for pool workers
_WORKER_ARGS = None


def _init_worker(kinds, motor, bounds, materials, geometry):
    global _WORKER_ARGS
    setup_worker_logging()
    _WORKER_ARGS = (kinds, motor, bounds, materials, geometry)


def _worker(ratio_bin: RatioBin) -> CatalogBin:
    return evaluate_bin(ratio_bin, *_WORKER_ARGS)


class CatalogBuilder:
    """Builds the ratio -> lightest actuator catalog, optionally across processes."""

    def __init__(
        self,
        motor: MotorSpec,
        bounds: GearboxBounds,
        grid: RatioGrid,
        materials: Optional[MaterialTable] = None,
        geometry: Optional[ActuatorGeometry] = None,
        kinds: Iterable[GearboxKind] = (GearboxKind.ISSPG, GearboxKind.ESSPG),
        jobs: Optional[int] = None,
    ):
        """Initialize builder.

        Args:
            motor: Motor shared by every actuator
            bounds: Gear variable limits (the ratio window is set per bin)
            grid: Ratio sweep
            materials: Densities and bearing law
            geometry: Component proportions
            kinds: Gearbox kinds to search
            jobs: Worker processes; 1 runs in-process, None uses every CPU
        """
        self.motor = motor
        self.bounds = bounds
        self.grid = grid
        self.materials = materials or MaterialTable()
        self.geometry = geometry or ActuatorGeometry()
        self.kinds = sorted(set(kinds), key=KIND_ORDER.get)
        self.jobs = jobs or os.cpu_count() or 1
        self.logger = logging.getLogger(__name__)

    def build(self, progress: Optional[Callable[[int], None]] = None) -> ActuatorCatalog:
        """Evaluate every bin; results are ordered by bin index, not completion.

        Args:
            progress: Called once per finished bin
        """
        bins = self.grid.bins()
        kind_names = ", ".join(k.value for k in self.kinds)
        self.logger.info(f"Stage 1: {len(bins)} ratio bins, kinds [{kind_names}], {self.jobs} job(s)")

        args = (self.kinds, self.motor, self.bounds, self.materials, self.geometry)
        results: List[CatalogBin] = []
        if self.jobs == 1:
            for ratio_bin in bins:
                results.append(evaluate_bin(ratio_bin, *args))
                if progress:
                    progress(1)
        else:
            with ProcessPoolExecutor(max_workers=self.jobs, initializer=_init_worker,
                                     initargs=args) as pool:
                for entry in pool.map(_worker, bins):
                    results.append(entry)
                    if progress:
                        progress(1)

        for entry in results:
            if entry.best is not None:
                self.logger.debug(
                    f"bin {entry.bin.label()}: {entry.best.kind.value} "
                    f"{entry.best.gear_train.label()} {entry.best.mass:.4f} kg"
                )

        catalog = ActuatorCatalog(grid=self.grid, motor=self.motor, kinds=self.kinds, bins=results)
        self.logger.info(f"Stage 1 complete: {len(catalog.non_empty())}/{len(bins)} bins feasible")
        return catalog


def build_catalog(
    motor: MotorSpec,
    bounds: GearboxBounds,
    grid: RatioGrid,
    materials: Optional[MaterialTable] = None,
    geometry: Optional[ActuatorGeometry] = None,
    kinds: Iterable[GearboxKind] = (GearboxKind.ISSPG, GearboxKind.ESSPG),
    jobs: Optional[int] = 1,
) -> ActuatorCatalog:
    return CatalogBuilder(motor, bounds, grid, materials, geometry, kinds, jobs).build()


def lookup(catalog: ActuatorCatalog, ratio: float) -> ActuatorDesign:
    """Lightest actuator of the bin holding ``ratio``.

    Raises:
        NoFeasibleActuatorError: If the ratio is off the grid or its bin is empty
    """
    index = catalog.grid.bin_index(exact(ratio) if not isinstance(ratio, Fraction) else ratio)
    if index is None:
        raise NoFeasibleActuatorError(float(ratio), "outside the catalog grid")
    best = catalog.bins[index].best
    if best is None:
        raise NoFeasibleActuatorError(float(ratio), f"bin {catalog.bins[index].bin.label()} is empty")
    return best
