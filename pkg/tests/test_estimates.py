import math

import numpy as np
import pytest

from circinc.errors import EmptyE
from circinc.estimates import (circular_average_field, circular_average_levelset, cone_average_field,
                               cone_average_levelset, focusing_set, knapp_set, lambda_grid, region_cells,
                               scaling_set, sphere_kernel, time_slices)
from circinc.regions import RegionSpec

DELTA = 2.0 ** -6
NOWHERE = RegionSpec.ball((0.3, 0.3), 1e-4)  # no lattice point at spacing delta/2


@pytest.mark.parametrize("dim,delta", [(2, 2 ** -4), (2, 2 ** -6), (3, 2 ** -3)])
def test_kernel_has_unit_mass(dim, delta):
    off, w = sphere_kernel(delta, delta / 2, dim)
    assert abs(w.sum() - 1.0) <= 1e-9
    r = np.linalg.norm(off * delta / 2, axis=1)
    assert np.all(np.abs(r - 1.0) <= delta)


def test_region_cells_box():
    cells = region_cells(RegionSpec.box((0.0, 0.0), (1.0, 0.5)), 0.25)
    assert len(cells) == 5 * 3
    with pytest.raises(ValueError):
        region_cells(RegionSpec.box((0.0,), (1.0,)), 0.25, 2)


def test_focusing_origin_is_full():
    field = circular_average_field(focusing_set(DELTA), DELTA, DELTA / 2)
    assert field.value_at((0.0, 0.0)) == 1.0
    res = circular_average_levelset(focusing_set(DELTA), DELTA, 0.5, DELTA / 2, field=field)
    assert res.measure_F > 0 and res.ratio > 0
    assert res.ratio == pytest.approx(0.5 ** 3 * res.measure_F / res.measure_E ** 2)


def test_empty_input_is_rejected():
    with pytest.raises(EmptyE):
        circular_average_levelset(NOWHERE, DELTA, 0.5, DELTA / 2)
    with pytest.raises(EmptyE):
        cone_average_levelset(NOWHERE, DELTA, 0.5, DELTA / 2)


def test_argument_checks():
    with pytest.raises(ValueError):
        circular_average_levelset(focusing_set(DELTA), DELTA, 0.5, DELTA)
    with pytest.raises(ValueError):
        circular_average_levelset(focusing_set(DELTA), DELTA, 1.5, DELTA / 2)
    with pytest.raises(ValueError):
        circular_average_field(focusing_set(DELTA), DELTA, DELTA / 2, dimension=4)


def test_level_sets_are_nested():
    field = circular_average_field(knapp_set(DELTA), DELTA, DELTA / 2)
    lams = sorted(lambda_grid(DELTA))
    for lo, hi in zip(lams, lams[1:]):
        assert np.all((field.values > lo) >= (field.values > hi))
    assert [field.measure_F(l) for l in lams] == sorted((field.measure_F(l) for l in lams), reverse=True)


def test_field_matches_direct_quadrature():
    E = scaling_set(2 ** -4)
    h = 2 ** -5
    field = circular_average_field(E, 2 ** -4, h)
    off, _ = sphere_kernel(2 ** -4, h, 2)
    cells = {tuple(c) for c in region_cells(E, h).tolist()}
    for idx in [(0, 0), (32, 0), (31, 3), (10, -25)]:
        direct = sum((idx[0] - o[0], idx[1] - o[1]) in cells for o in off.tolist()) / len(off)
        assert field.value_at((idx[0] * h, idx[1] * h)) == pytest.approx(direct, abs=1e-12)


def _interior_level(f1, f2):
    top = min(f1.values.max(), f2.values.max()) / 8
    return max(l for l in lambda_grid(f1.delta) if l <= top)


@pytest.mark.parametrize("make", [focusing_set, knapp_set, scaling_set], ids=["focusing", "knapp", "scaling"])
def test_grid_refinement_is_stable(make):
    E = make(DELTA)
    coarse = circular_average_field(E, DELTA, DELTA / 2)
    fine = circular_average_field(E, DELTA, DELTA / 4)
    lam = 0.5 if make is focusing_set else _interior_level(coarse, fine)
    a, b = coarse.measure_F(lam), fine.measure_F(lam)
    assert a > 0 and abs(a - b) / a < 0.2


def test_three_dimensional_shell():
    d = 2 ** -3
    E = RegionSpec.annulus((0.0, 0.0, 0.0), 1.0, d)
    field = circular_average_field(E, d, d / 2, dimension=3)
    assert field.value_at((0, 0, 0)) == 1.0


def test_time_slices():
    ts = time_slices(0.25)
    assert ts.tolist() == [1.0, 1.25, 1.5, 1.75, 2.0]


def test_cone_box_interior_is_full():
    d = 2 ** -3
    box = RegionSpec.box((-3.0, -3.0), (6.0, 6.0))
    field = cone_average_field(box, d, d / 2)
    centre = -field.base
    assert all(v[tuple(centre)] == 1.0 for v in field.values)
    res = cone_average_levelset(box, d, 0.5, d / 2, field=field)
    assert math.isfinite(res.ratio) and res.ratio <= 1.0


def test_cone_knapp_peak_near_sqrt_delta():
    d = 2 ** -5
    field = cone_average_field(knapp_set(d), d, d / 2)
    lams = lambda_grid(d)
    ratios = [cone_average_levelset(knapp_set(d), d, l, d / 2, field=field).ratio for l in lams]
    best = lams[int(np.argmax(ratios))]
    target = math.sqrt(d) / (4 * math.pi)
    assert target / 4 <= best <= 4 * target
    scal = cone_average_field(scaling_set(d), d, d / 2)
    assert max(ratios) > max(cone_average_levelset(scaling_set(d), d, l, d / 2, field=scal).ratio for l in lams)
