import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circinc.errors import NoValidSplit
from circinc.families import (UNIT_BOX, BipartitePair, Box, CircleFamily, FamilyKind, NetMode, band_split,
                              bernoulli_thin, bipartite_split, concat, delta_net_family, knapp_family,
                              lattice_family, min_pairwise_distance, net_is_maximal, read_jsonl,
                              thin_indicator_reference, validate_bipartite, validate_separation, write_jsonl)
from circinc.geom_core import Circle, pair_metrics
from circinc.probab import binomial_tail


@pytest.mark.parametrize("N, size", [(2, 8), (4, 48), (16, 2304), (7, 7 * 7 * 4)])
def test_lattice_sizes(N, size):
    fam = lattice_family(N)
    assert len(fam) == size == N * N * (N - (N + 1) // 2 + 1)
    assert fam.kind is FamilyKind.LATTICE and fam.delta == 1 / N
    assert fam.rs.min() >= 0.5 and fam.rs.max() <= 1.0


def test_lattice_coordinates_are_exact():
    fam = lattice_family(16)
    lat = fam.lattice
    assert np.array_equal(fam.xs, lat[:, 0] / 16) and np.array_equal(fam.rs, lat[:, 2] / 16)
    assert fam.circle(5).lattice_coords == tuple(lat[5])
    with pytest.raises(ValueError):
        lattice_family(1)


@pytest.mark.parametrize("N", [4, 8, 13])
def test_lattice_min_distance(N):
    assert min_pairwise_distance(lattice_family(N)) == pytest.approx(1 / N, abs=1e-15)


def test_lattice_separation_examples():
    fam = lattice_family(8)
    assert not validate_separation(fam, 1 / 8)
    assert validate_separation(fam, 1 / 16)


def test_separation_edge_cases():
    one = CircleFamily.from_circles([Circle((0, 0), 1)], 0.1)
    assert validate_separation(one)
    dup = CircleFamily.from_circles([Circle((0, 0), 1), Circle((0, 0), 1)], 0.1)
    assert not validate_separation(dup)


def test_delta_net_examples():
    fam = delta_net_family(0.5, UNIT_BOX, seed=1)
    assert 1 <= len(fam) <= 50 and net_is_maximal(fam)
    big = delta_net_family(UNIT_BOX.diameter + 0.1, UNIT_BOX, seed=1)
    assert len(big) == 1
    a, b = delta_net_family(0.1, UNIT_BOX, seed=9), delta_net_family(0.1, UNIT_BOX, seed=9)
    assert np.array_equal(a.points(), b.points())


@pytest.mark.parametrize("delta", [0.2, 0.1, 0.06])
@pytest.mark.parametrize("seed", [0, 5])
def test_delta_net_is_separated_and_maximal(delta, seed):
    fam = delta_net_family(delta, UNIT_BOX, seed=seed)
    assert validate_separation(fam)
    assert net_is_maximal(fam)
    pts = fam.points()
    d = np.abs(pts[:, None, :2] - pts[None, :, :2])
    dd = np.hypot(d[..., 0], d[..., 1]) + np.abs(pts[:, None, 2] - pts[None, :, 2])
    np.fill_diagonal(dd, np.inf)
    assert dd.min() > delta


def test_radii_separated_net():
    fam = delta_net_family(0.05, UNIT_BOX, NetMode.RADII_SEPARATION, seed=2)
    assert fam.kind is FamilyKind.RADII_SEPARATED_NET
    assert np.diff(np.sort(fam.rs)).min() >= 0.05 - 1e-12
    assert UNIT_BOX.contains(fam.xs, fam.ys, fam.rs).all()
    assert validate_separation(fam)


def test_knapp_family():
    fam = knapp_family(2 ** -8)
    assert len(fam) == 256 * 17
    n = len(fam)
    assert 2 ** 12 / 4 <= n <= 4 * 2 ** 12
    # every member passes through the origin
    assert np.abs(np.hypot(fam.xs, fam.ys) - fam.rs).max() <= 1e-12
    with pytest.raises(ValueError):
        knapp_family(0.1)


@pytest.mark.parametrize("k", [6, 8])
def test_knapp_members_at_unit_separation_are_delta_tangent(k):
    # defect ~ r s theta^2 / (2 |r - s|): small once the radii differ by 1/2
    delta = 2.0 ** -k
    fam = knapp_family(delta)
    idx = np.arange(0, len(fam), max(1, len(fam) // 2000))
    xs, ys, rs = fam.xs[idx], fam.ys[idx], fam.rs[idx]
    rho = np.hypot(xs[:, None] - xs[None], ys[:, None] - ys[None])
    dr = np.abs(rs[:, None] - rs[None])
    tan = np.abs(rho - dr)
    assert tan[dr >= 0.5].max() <= 3 * delta


def test_bipartite_split_two_clusters():
    gen = np.random.default_rng(0)
    a = gen.normal([0, 0, 0.75], 0.005, (30, 3))
    b = gen.normal([0.9, 0, 0.75], 0.005, (40, 3))
    pts = np.vstack([a, b])
    fam = CircleFamily(pts[:, 0], pts[:, 1], pts[:, 2], 0.01, FamilyKind.CUSTOM)
    pair = bipartite_split(fam, 0.9)
    assert sorted(pair.sizes) == [30, 40]
    assert validate_bipartite(pair)


def test_bipartite_split_failure():
    gen = np.random.default_rng(1)
    pts = gen.normal([0.5, 0.5, 0.75], 1e-4, (20, 3))
    fam = CircleFamily(pts[:, 0], pts[:, 1], pts[:, 2], 1e-3, FamilyKind.CUSTOM)
    with pytest.raises(NoValidSplit):
        bipartite_split(fam, 0.5)
    with pytest.raises(NoValidSplit):
        bipartite_split(fam.subset(np.arange(0)), 0.5)


def test_bipartite_split_lattice():
    pair = bipartite_split(lattice_family(32), 0.5)
    m, n = pair.sizes
    assert m > 0 and n > 0
    assert validate_bipartite(pair)


def test_band_split_claims_cross_condition_only():
    fam = delta_net_family(0.1, UNIT_BOX, seed=3)
    pair = band_split(fam, (0.5, 0.55), (0.95, 1.0), 0.3)
    assert pair.cross_only
    assert validate_bipartite(pair)
    assert (pair.white.rs <= 0.55).all() and (pair.black.rs >= 0.95).all()


def test_validate_bipartite_detects_violation():
    w = CircleFamily.from_circles([Circle((0, 0), 1)], 0.01)
    b = CircleFamily.from_circles([Circle((0.1, 0), 1)], 0.01)
    assert not validate_bipartite(BipartitePair(w, b, 0.5))
    assert validate_bipartite(BipartitePair(w, b, 0.1))


def test_thinning_extremes_and_reference():
    fam = lattice_family(8)
    assert len(bernoulli_thin(fam, 1.0, 4)) == len(fam)
    assert len(bernoulli_thin(fam, 0.0, 4)) == 0
    th = bernoulli_thin(fam, 0.3, 11)
    ref = np.flatnonzero(thin_indicator_reference(len(fam), 0.3, 11))
    assert np.array_equal(th.points(), fam.points()[ref])
    assert np.array_equal(th.lattice, fam.lattice[ref])
    assert th.kind is FamilyKind.THINNED and th.seed == 11
    with pytest.raises(ValueError):
        bernoulli_thin(fam, 1.5, 0)


def test_thinning_concentration():
    n = 4096
    fam = CircleFamily(np.zeros(n), np.zeros(n), np.ones(n), 0.1, FamilyKind.CUSTOM)
    # the +-10% window fails with probability below 2e-9
    with pytest.warns(UserWarning):
        tail = binomial_tail(n, 0.5, 0.9) * 2
    assert tail < 2e-9
    for seed in range(100):
        assert 1843 <= len(bernoulli_thin(fam, 0.5, seed)) <= 2253


@given(st.integers(0, 2 ** 64 - 1), st.floats(0, 1))
def test_thinning_is_subset(seed, p):
    fam = lattice_family(4)
    th = bernoulli_thin(fam, p, seed)
    assert {tuple(r) for r in th.lattice.tolist()} <= {tuple(r) for r in fam.lattice.tolist()}


def test_jsonl_round_trip(tmp_path):
    fam = lattice_family(6)
    write_jsonl(fam, tmp_path / "lat.jsonl")
    back = read_jsonl(tmp_path / "lat.jsonl")
    assert np.array_equal(back.lattice, fam.lattice)
    assert np.array_equal(back.points(), fam.points())
    assert back.kind is FamilyKind.LATTICE and back.delta == fam.delta and back.box == fam.box
    net = delta_net_family(0.2, UNIT_BOX, seed=4)
    write_jsonl(net, tmp_path / "net.jsonl")
    again = read_jsonl(tmp_path / "net.jsonl")
    assert np.array_equal(again.points(), net.points()) and again.seed == 4


def test_box_and_concat():
    with pytest.raises(ValueError):
        Box(0, 1, 0, 1, 0, 1)
    assert UNIT_BOX.diameter == pytest.approx(math.sqrt(2) + 0.5)
    both = concat([lattice_family(2), lattice_family(4)])
    assert len(both) == 8 + 48 and both.delta == 0.25


def test_family_is_immutable():
    fam = lattice_family(4)
    with pytest.raises(ValueError):
        fam.xs[0] = 3.0
    with pytest.raises(ValueError):
        CircleFamily(np.zeros(2), np.zeros(2), np.array([1.0, -1.0]), 0.1, FamilyKind.CUSTOM)


def test_pair_metrics_lattice_circles_agree_with_float():
    fam = lattice_family(8)
    for i, j in [(0, 5), (3, 100), (17, 200)]:
        exact = pair_metrics(fam.circle(i), fam.circle(j))
        c1 = Circle(fam.circle(i).center, fam.circle(i).radius)
        c2 = Circle(fam.circle(j).center, fam.circle(j).radius)
        assert exact == pytest.approx(pair_metrics(c1, c2), abs=1e-12)
