import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circinc.errors import DegenerateInput
from circinc.geom_core import (Circle, DefiningFunction, DefiningKind, TangencyRectangle, arc_offset,
                               circle_tangent_to_rectangle, cover_intersection_rectangles, curvature_matrix,
                               dyadic_scale, finite_difference_matrix, intersection_bounds, is_delta_tangent,
                               pair_metrics, random_zero_set_point, rectangles_comparable,
                               rotational_curvature_det)

coord = st.floats(-3, 3, allow_nan=False)
radius = st.floats(0.05, 3, allow_nan=False)
circles = st.builds(lambda x, y, r: Circle((x, y), r), coord, coord, radius)


@pytest.mark.parametrize("c1, c2, expected", [
    (Circle((0, 0), 1), Circle((3, 0), 2), (2.0, 4.0)),
    (Circle((0, 0), 1), Circle((0, 0), 1), (0.0, 0.0)),
    (Circle((0, 0), 1), Circle((1, 0), 2), (0.0, 2.0)),
])
def test_pair_metrics_examples(c1, c2, expected):
    assert pair_metrics(c1, c2) == pytest.approx(expected, abs=1e-15)


def test_pair_metrics_lattice_path_is_exact():
    # (3, 4, 5) scaled: centre offset 5/7, radius gap 5/7
    a = Circle.from_lattice(1, 1, 2, 7)
    b = Circle.from_lattice(4, 5, 7, 7)
    assert pair_metrics(a, b).delta_tan == 0.0
    assert pair_metrics(a, b).dist == pytest.approx(10 / 7)


@given(circles, circles)
def test_pair_metrics_symmetric_and_ordered(c1, c2):
    m12, m21 = pair_metrics(c1, c2), pair_metrics(c2, c1)
    assert m12 == m21
    assert m12.delta_tan <= m12.dist + 1e-12


@given(circles)
def test_pair_metrics_zero_only_for_identical(c):
    assert pair_metrics(c, c) == (0.0, 0.0)
    other = Circle(c.center, c.radius * 1.5)
    assert pair_metrics(c, other).dist > 0


def test_intersection_bounds_examples():
    b = intersection_bounds(Circle((0, 0), 1), Circle((1, 0), 2), 0.01)
    assert b.area_bound == pytest.approx(1e-4 / math.sqrt(0.01 * 2.01))
    assert b.diam_bound == pytest.approx(math.sqrt(0.01 / 2.01))
    same = intersection_bounds(Circle((0, 0), 1), Circle((0, 0), 1), 0.01)
    assert same.area_bound == pytest.approx(0.01)
    # defect 0.5 and d 0.5: concentric radii 1 and 1.5 have tan = 0.5, d = 0.5
    far = intersection_bounds(Circle((0, 0), 1), Circle((0, 0), 1.5), 0.01)
    assert far.area_bound == pytest.approx(1e-4 / 0.51)


def test_is_delta_tangent_examples():
    assert is_delta_tangent(Circle((0, 0), 1), Circle((1, 0), 2), 0.01)
    assert not is_delta_tangent(Circle((0, 0), 1), Circle((5, 0), 1), 0.01)
    # externally touching circles have defect 2.005 under the internal convention
    assert not is_delta_tangent(Circle((0, 0), 1), Circle((2.005, 0), 1), 0.01)
    assert is_delta_tangent(Circle((0, 0), 1), Circle((1.005, 0), 2), 0.01)
    with pytest.raises(ValueError):
        is_delta_tangent(Circle((0, 0), 1), Circle((1, 0), 2), 0.0)


@given(circles, circles, st.floats(1e-4, 0.5), st.floats(1.0, 10.0))
def test_is_delta_tangent_monotone(c1, c2, delta, grow):
    if is_delta_tangent(c1, c2, delta):
        assert is_delta_tangent(c1, c2, delta * grow)


@pytest.mark.parametrize("d, t", [(0.3, 0.5), (0.5, 0.5), (0.51, 1.0), (2.0, 2.0), (3.0, 4.0), (1e-3, 2 ** -9)])
def test_dyadic_scale(d, t):
    assert dyadic_scale(d) == t
    assert t / 2 < d <= t


def test_rectangle_geometry():
    r = TangencyRectangle(Circle((0, 0), 2), 0.3, 0.01, 1.0)
    assert r.arc_length == pytest.approx(0.1)
    assert r.half_angle == pytest.approx(0.025)
    assert r.center_point == pytest.approx((2 * math.cos(0.3), 2 * math.sin(0.3)))
    with pytest.raises(ValueError):
        TangencyRectangle(Circle((0, 0), 1), 0.0, 0.5, 0.25)


def test_cover_exact_internal_tangency_centres_on_the_point():
    c1, c2 = Circle((0, 0), 1), Circle((1, 0), 2)
    rects = cover_intersection_rectangles(c1, c2, 0.01)
    assert all(r.t == 2.0 for r in rects)
    assert len(rects) % 2 == 1
    mid = rects[len(rects) // 2]
    # tangency point (-1, 0) sits at angle pi on c1
    assert abs(abs(mid.arc_center_angle) - math.pi) < 1e-12


def test_cover_rejects_degenerate_and_far_pairs():
    with pytest.raises(DegenerateInput):
        cover_intersection_rectangles(Circle((0, 0), 1), Circle((0, 0), 1), 0.01)
    with pytest.raises(DegenerateInput):
        cover_intersection_rectangles(Circle((0, 0), 1), Circle((1.5, 0), 0.5), 0.01)


def _annulus_points(c, delta, spacing):
    s = np.linspace(-delta, delta, 9)
    m = int(math.ceil(2 * math.pi * (c.radius + delta) / spacing))
    a = np.linspace(-math.pi, math.pi, m, endpoint=False)
    R = (c.radius + s)[:, None]
    return (c.center[0] + R * np.cos(a)).ravel(), (c.center[1] + R * np.sin(a)).ravel()


def test_cover_contains_sampled_intersection():
    gen = np.random.default_rng(7)
    for _ in range(1000):
        delta = float(gen.uniform(1e-3, 1e-2))
        c1 = Circle(gen.uniform(0, 1, 2), gen.uniform(0.5, 1.0))
        s = float(gen.uniform(0.5, 2.0))
        u = gen.normal(size=2)
        u /= np.linalg.norm(u)
        dist = abs(c1.radius - s) + gen.uniform(-delta, delta)
        if dist <= 0 or abs(c1.radius - s) < 4 * delta:
            continue
        c2 = Circle(np.asarray(c1.center) + dist * u, s)
        rects = cover_intersection_rectangles(c1, c2, delta)
        x, y = _annulus_points(c1, delta, delta / 4)
        inside = np.abs(np.hypot(x - c2.center[0], y - c2.center[1]) - c2.radius) <= delta
        ang = np.arctan2(y[inside] - c1.center[1], x[inside] - c1.center[0])
        covered = np.zeros(ang.size, bool)
        for r in rects:
            off = np.abs((ang - r.arc_center_angle + math.pi) % (2 * math.pi) - math.pi)
            covered |= off <= r.half_angle + 1e-12
        assert covered.all()


def test_circle_tangent_to_rectangle_examples():
    base = Circle((0, 0), 1)
    r = TangencyRectangle(base, 0.7, 0.01, 1.0)
    assert circle_tangent_to_rectangle(base, r, a1=1.0)
    assert not circle_tangent_to_rectangle(Circle((0, 0), 1 + 10 * 4 * 0.01), r, a1=4.0)
    # internally tangent at the arc centre, d = t = 1
    p = np.array(base.point_at(0.7))
    inner = Circle(p - 2.0 * (p - np.array(base.center)) / 1.0 * 1.0, 2.0)
    assert pair_metrics(base, inner).delta_tan == pytest.approx(0.0, abs=1e-12)
    assert circle_tangent_to_rectangle(inner, r, a1=4.0)


@given(circles, st.floats(-math.pi, math.pi), circles)
def test_arc_offset_matches_dense_sampling(base, phi, c):
    r = TangencyRectangle(base, phi, 0.01, 1.0)
    a = phi + np.linspace(-r.half_angle, r.half_angle, 4001)
    x = base.center[0] + base.radius * np.cos(a)
    y = base.center[1] + base.radius * np.sin(a)
    sampled = np.abs(np.hypot(x - c.center[0], y - c.center[1]) - c.radius).max()
    assert arc_offset(r, c) == pytest.approx(sampled, abs=1e-9)


def _contains(big_base, phi, half, width, pts):
    d = np.abs(np.hypot(pts[:, 0] - big_base.center[0], pts[:, 1] - big_base.center[1]) - big_base.radius)
    a = np.arctan2(pts[:, 1] - big_base.center[1], pts[:, 0] - big_base.center[0])
    off = np.abs((a - phi + math.pi) % (2 * math.pi) - math.pi)
    return bool(np.all((d <= width) & (off <= half)))


def test_rectangles_comparable_examples():
    delta, t = 0.001, 1.0
    c = Circle((0, 0), 1)
    r1 = TangencyRectangle(c, 0.0, delta, t)
    assert rectangles_comparable(r1, r1)
    far = TangencyRectangle(c, 10 * math.sqrt(delta / t), delta, t)
    assert not rectangles_comparable(r1, far, a0=2)
    near = TangencyRectangle(Circle((-0.0005, 0), 1.0005), 0.0, delta, t)
    assert pair_metrics(c, near.base).delta_tan <= delta
    assert rectangles_comparable(r1, near, a0=4)


def test_rectangles_comparable_is_sound():
    """A positive answer comes with a containing rectangle: check one by sampling."""
    gen = np.random.default_rng(3)
    delta, t, a0 = 0.001, 1.0, 4.0
    hits = 0
    for _ in range(300):
        c = Circle(gen.uniform(-0.002, 0.002, 2), gen.uniform(0.997, 1.003))
        phi = gen.uniform(-0.03, 0.03)
        r1 = TangencyRectangle(Circle((0, 0), 1), 0.0, delta, t)
        r2 = TangencyRectangle(c, phi, delta, t)
        if not rectangles_comparable(r1, r2, a0):
            continue
        hits += 1
        pts = np.vstack([r1.sample(delta / 8), r2.sample(delta / 8)])
        ok = False
        for big in (r1.base, r2.base):
            a = np.arctan2(pts[:, 1] - big.center[1], pts[:, 0] - big.center[0])
            ref = math.atan2(pts[0, 1] - big.center[1], pts[0, 0] - big.center[0])
            rel = (a - ref + math.pi) % (2 * math.pi) - math.pi
            mid = ref + (rel.max() + rel.min()) / 2
            half = 0.5 * math.sqrt(a0 * delta / t) / big.radius + 2 * delta / big.radius
            ok |= _contains(big, mid, half, a0 * delta + 1e-9, pts)
        assert ok
    assert hits > 30


@pytest.mark.parametrize("kind, x, y", [
    (DefiningKind.SPHERE, (0, 0), (1, 0)),
    (DefiningKind.PLANE, (1, 0), (1, 0)),
    (DefiningKind.PLANE, (1, 0), (1, 7)),
])
def test_rotational_curvature_examples(kind, x, y):
    phi = DefiningFunction(kind, 2)
    assert rotational_curvature_det(phi, x, y) == pytest.approx(-1.0, abs=1e-12)
    fd = np.linalg.det(finite_difference_matrix(phi, x, y))
    assert fd == pytest.approx(-1.0, rel=1e-4)


def test_rotational_curvature_rejects_bad_points():
    sphere = DefiningFunction(DefiningKind.SPHERE, 2)
    with pytest.raises(DegenerateInput):
        rotational_curvature_det(sphere, (0, 0), (0.5, 0))
    with pytest.raises(DegenerateInput):
        curvature_matrix(sphere, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        rotational_curvature_det(sphere, (0, 0, 0), (1, 0))
    with pytest.raises(ValueError):
        DefiningFunction(DefiningKind.PLANE, 1)


@pytest.mark.parametrize("kind", list(DefiningKind))
@pytest.mark.parametrize("dim", [2, 3, 4])
def test_random_zero_set_points_lie_on_zero_set(kind, dim):
    phi = DefiningFunction(kind, dim)
    gen = np.random.default_rng(dim)
    for _ in range(50):
        x, y = random_zero_set_point(phi, gen)
        assert abs(phi(x, y)) < 1e-9
        m = curvature_matrix(phi, x, y)
        assert np.allclose(m, finite_difference_matrix(phi, x, y), rtol=1e-4, atol=1e-4 * np.abs(m).max())
