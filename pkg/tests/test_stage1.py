from fractions import Fraction
from itertools import product

import pytest

from src.actuators.gearbox import validate
from src.actuators.mass_models import make_actuator
from src.actuators.stage1 import (
    NoFeasibleActuatorError,
    build_catalog,
    enumerate_feasible,
    evaluate_bin,
    lookup,
    selection_key,
)
from src.models.actuator import ActuatorGeometry, MaterialTable, RatioBin, RatioGrid
from src.models.gearing import GearboxBounds, GearboxKind, GearTrain, MotorSpec

MOTOR = MotorSpec()
BOUNDS = GearboxBounds()
MATERIALS = MaterialTable()


def labels(designs):
    return {(d.gear_train.sun_teeth, d.gear_train.planet_teeth, d.gear_train.ring_teeth,
             d.gear_train.module, d.gear_train.planet_count) for d in designs}


def test_grid_bins_are_contiguous_and_close_the_last_edge():
    bins = RatioGrid(lo=4.0, hi=4.5, step=0.1).bins()
    assert [b.lo for b in bins] == pytest.approx([4.0, 4.1, 4.2, 4.3, 4.4])
    assert all(a.hi == b.lo for a, b in zip(bins, bins[1:]))
    assert [b.closed_upper for b in bins] == [False] * 4 + [True]


def test_grid_rejects_uneven_step():
    with pytest.raises(ValueError):
        RatioGrid(lo=4.0, hi=4.25, step=0.1)


def test_bin_index_uses_exact_edges():
    grid = RatioGrid()
    assert grid.bin_index(Fraction(6)) == 20
    assert grid.bin_index(Fraction(59, 10)) == 19
    assert grid.bin_index(Fraction(15)) == grid.bin_count - 1
    assert grid.bin_index(Fraction(3)) is None


def test_nominal_train_is_in_the_6_0_bin():
    found = enumerate_feasible(GearboxKind.ISSPG, MOTOR, BOUNDS, RatioBin(index=20, lo=6.0, hi=6.1), MATERIALS)
    assert (18, 36, 90, 0.5, 3) in labels(found)
    assert found == sorted(found, key=selection_key)


def test_nominal_train_is_not_in_the_bin_below():
    found = enumerate_feasible(GearboxKind.ISSPG, MOTOR, BOUNDS, RatioBin(index=19, lo=5.9, hi=6.0), MATERIALS)
    assert all(d.ratio < 6.0 for d in found)
    assert (18, 36, 90, 0.5, 3) not in labels(found)


def test_isspg_cannot_reach_ratio_8():
    found = enumerate_feasible(GearboxKind.ISSPG, MOTOR, BOUNDS, RatioBin(index=40, lo=8.0, hi=8.1), MATERIALS)
    assert found == []


def test_enumeration_matches_brute_force_on_reduced_grid():
    bounds = BOUNDS.model_copy(update={"max_teeth": 40})
    ratio_bin = RatioBin(index=10, lo=5.0, hi=5.1)
    window = bounds.with_ratio_window(ratio_bin.lo, ratio_bin.hi)

    for kind in GearboxKind:
        expected = set()
        for ns, np_, module, planets in product(range(18, 41), range(18, 41), bounds.modules, range(2, 8)):
            gt = GearTrain(sun_teeth=ns, planet_teeth=np_, ring_teeth=ns + 2 * np_,
                           module=module, planet_count=planets)
            if validate(gt, kind, MOTOR, window).feasible:
                expected.add((ns, np_, ns + 2 * np_, module, planets))
        found = enumerate_feasible(kind, MOTOR, bounds, ratio_bin, MATERIALS)
        assert labels(found) == expected
        assert expected


def test_evaluate_bin_picks_lightest_overall():
    entry = evaluate_bin(RatioBin(index=20, lo=6.0, hi=6.1), [GearboxKind.ISSPG, GearboxKind.ESSPG],
                         MOTOR, BOUNDS, MATERIALS, ActuatorGeometry())
    assert entry.best is not None
    assert entry.best.mass == min(entry.best_isspg.mass, entry.best_esspg.mass)
    assert entry.feasible_isspg > 0 and entry.feasible_esspg > 0


def test_catalog_prefers_isspg_wherever_it_exists(catalog):
    for entry in catalog.bins:
        if entry.best_isspg is not None:
            assert entry.best.kind == GearboxKind.ISSPG


def test_isspg_range_ends_in_the_6_5_bin(catalog):
    isspg_bins = [entry.bin.lo for entry in catalog.bins if entry.best_isspg is not None]
    assert max(isspg_bins) == pytest.approx(6.5)


def test_catalog_best_is_no_heavier_than_any_candidate(catalog, codesign_config):
    config = codesign_config
    for entry in catalog.bins[::6]:
        for kind in catalog.kinds:
            for design in enumerate_feasible(kind, config.motor, config.gearbox_bounds, entry.bin,
                                             config.materials, config.actuator_geometry):
                assert entry.best.mass <= design.mass


def test_catalog_entries_revalidate(catalog, codesign_config):
    config = codesign_config
    for entry in catalog.non_empty():
        window = config.gearbox_bounds.with_ratio_window(entry.bin.lo, entry.bin.hi, entry.bin.closed_upper)
        assert validate(entry.best.gear_train, entry.best.kind, config.motor, window).feasible


def test_catalog_mass_grows_with_ratio_per_kind(catalog):
    for attr in ("best_isspg", "best_esspg"):
        points = [(getattr(e, attr).ratio, getattr(e, attr).mass) for e in catalog.bins
                  if getattr(e, attr) is not None]
        (r0, m0), (r1, m1) = points[0], points[-1]
        assert (m1 - m0) / (r1 - r0) > 0


def test_lookup_nominal_ratio(catalog):
    design = lookup(catalog, 6.0)
    gt = design.gear_train
    assert (gt.sun_teeth, gt.planet_teeth, gt.ring_teeth) == (18, 36, 90)
    assert design.kind == GearboxKind.ISSPG
    assert design.peak_torque == pytest.approx(15.0)


def test_lookup_low_ratio_beats_five_planet_train(catalog):
    design = lookup(catalog, 4.05)
    assert design.kind == GearboxKind.ISSPG
    assert design.exact_ratio == 4
    five_planets = make_actuator(
        GearTrain(sun_teeth=30, planet_teeth=30, ring_teeth=90, module=0.5, planet_count=5),
        GearboxKind.ISSPG, MOTOR, MATERIALS,
    )
    assert design.mass <= five_planets.mass


def train_tuple(design):
    gt = design.gear_train
    return (gt.sun_teeth, gt.planet_teeth, gt.ring_teeth, gt.module, gt.planet_count)


def test_lookup_picks_two_planet_trains(catalog):
    assert train_tuple(lookup(catalog, 6.0)) == (18, 36, 90, 0.5, 2)
    assert train_tuple(lookup(catalog, 4.05)) == (18, 18, 54, 0.5, 2)


def test_lookup_off_grid_raises(catalog):
    with pytest.raises(NoFeasibleActuatorError, match="no feasible actuator at ratio 14.95"):
        lookup(catalog, 14.95)


def test_esspg_reaches_9_6_but_not_9_7():
    grid = RatioGrid(lo=9.6, hi=9.8, step=0.1)
    catalog = build_catalog(MOTOR, BOUNDS, grid, MATERIALS, jobs=1)
    low, high = catalog.bins

    assert low.best is not None
    assert low.best.kind == GearboxKind.ESSPG
    assert low.feasible_isspg == 0
    assert low.best.gear_train.ring_teeth * low.best.gear_train.module <= 78.0
    assert high.best is None
    with pytest.raises(NoFeasibleActuatorError, match="is empty"):
        lookup(catalog, 9.75)


def test_parallel_build_equals_serial():
    grid = RatioGrid(lo=5.9, hi=6.2, step=0.1)
    serial = build_catalog(MOTOR, BOUNDS, grid, MATERIALS, jobs=1)
    parallel = build_catalog(MOTOR, BOUNDS, grid, MATERIALS, jobs=2)
    assert parallel.model_dump_json() == serial.model_dump_json()


def test_single_kind_catalog_has_no_other_kind():
    grid = RatioGrid(lo=6.0, hi=6.2, step=0.1)
    catalog = build_catalog(MOTOR, BOUNDS, grid, MATERIALS, kinds=[GearboxKind.ESSPG], jobs=1)
    assert catalog.kinds == [GearboxKind.ESSPG]
    assert all(entry.best_isspg is None for entry in catalog.bins)
    assert all(entry.best.kind == GearboxKind.ESSPG for entry in catalog.non_empty())
