"""Circles, annuli, tangency metrics, (delta, t)-rectangles and the rotational
curvature determinant of the two built-in defining functions."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInput

A0_DEFAULT = 4.0
A1_DEFAULT = 4.0
ABS_TOL = 1e-12


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float
    lattice_coords: tuple[int, int, int] | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if self.lattice_coords is not None:
            object.__setattr__(self, "lattice_coords", tuple(int(v) for v in self.lattice_coords))

    @classmethod
    def from_lattice(cls, j: int, k: int, l: int, n: int) -> "Circle":
        """The circle C(j/n, k/n, l/n) carrying its integer coordinates."""
        return cls((j / n, k / n), l / n, (j, k, l))

    def point_at(self, phi: float) -> tuple[float, float]:
        return (self.center[0] + self.radius * math.cos(phi),
                self.center[1] + self.radius * math.sin(phi))

    def distance_to(self, px: float, py: float) -> float:
        """Distance from a point to the circle itself (not the disk)."""
        return abs(math.hypot(px - self.center[0], py - self.center[1]) - self.radius)


class PairMetrics(NamedTuple):
    delta_tan: float
    dist: float


def pair_metrics(c1: Circle, c2: Circle) -> PairMetrics:
    """Internal-tangency defect and separation of two circles.

    When both circles carry lattice coordinates the tangency test is done on
    integers, so an exact tangency reports a defect of exactly zero.
    """
    if c1.lattice_coords is not None and c2.lattice_coords is not None:
        j1, k1, l1 = c1.lattice_coords
        j2, k2, l2 = c2.lattice_coords
        scale = c1.radius / l1
        rho2 = (j1 - j2) ** 2 + (k1 - k2) ** 2
        dl = abs(l1 - l2)
        root = math.isqrt(rho2)
        rho = float(root) if root * root == rho2 else math.sqrt(rho2)
        tan = 0.0 if rho2 == dl * dl else abs(rho - dl) * scale
        return PairMetrics(tan, (rho + dl) * scale)
    rho = math.hypot(c1.center[0] - c2.center[0], c1.center[1] - c2.center[1])
    dr = abs(c1.radius - c2.radius)
    return PairMetrics(abs(rho - dr), rho + dr)


class IntersectionBounds(NamedTuple):
    area_bound: float
    diam_bound: float


def intersection_bounds(c1: Circle, c2: Circle, delta: float) -> IntersectionBounds:
    if not delta > 0:
        raise ValueError("delta must be positive")
    tan, dist = pair_metrics(c1, c2)
    return IntersectionBounds(delta * delta / math.sqrt((tan + delta) * (dist + delta)),
                              math.sqrt((tan + delta) / (dist + delta)))


def is_delta_tangent(c1: Circle, c2: Circle, delta: float) -> bool:
    """Tangency defect at most delta, with the two delta-annuli actually meeting."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    tan, _ = pair_metrics(c1, c2)
    rho = math.hypot(c1.center[0] - c2.center[0], c1.center[1] - c2.center[1])
    meets = (rho <= c1.radius + c2.radius + 2 * delta + ABS_TOL
             and rho >= abs(c1.radius - c2.radius) - 2 * delta - ABS_TOL)
    return tan <= delta + ABS_TOL and meets


def dyadic_scale(d: float) -> float:
    """The power of two t with t/2 < d <= t."""
    if not d > 0:
        raise DegenerateInput("dyadic scale of a non-positive distance")
    t = 2.0 ** math.ceil(math.log2(d))
    # guard against log2 rounding at exact powers of two
    if t / 2 >= d:
        t /= 2
    elif t < d:
        t *= 2
    return t


@dataclass(frozen=True)
class TangencyRectangle:
    """The delta-neighbourhood of an arc of length sqrt(delta/t) on ``base``,
    centred at angle ``arc_center_angle`` (radians, measured at the base centre)."""

    base: Circle
    arc_center_angle: float
    delta: float
    t: float

    def __post_init__(self):
        if not self.delta > 0 or not self.t >= self.delta:
            raise ValueError("need 0 < delta <= t")

    @property
    def arc_length(self) -> float:
        return math.sqrt(self.delta / self.t)

    @property
    def half_angle(self) -> float:
        return 0.5 * self.arc_length / self.base.radius

    @property
    def center_point(self) -> tuple[float, float]:
        return self.base.point_at(self.arc_center_angle)

    def sample(self, spacing: float) -> np.ndarray:
        """Points covering the rectangle: three parallel arcs at offsets -delta, 0,
        +delta, each sampled at arc spacing <= ``spacing``, endpoints included."""
        n = max(2, int(math.ceil(self.arc_length / spacing)) + 1)
        phis = self.arc_center_angle + np.linspace(-self.half_angle, self.half_angle, n)
        cx, cy = self.base.center
        rows = []
        for off in (-self.delta, 0.0, self.delta):
            rad = self.base.radius + off
            rows.append(np.column_stack([cx + rad * np.cos(phis), cy + rad * np.sin(phis)]))
        return np.vstack(rows)


def _wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi


def _annulus_angles(c1: Circle, c2: Circle, delta: float, rad: float) -> list[tuple[float, float]]:
    """Angular intervals (relative to c2's direction seen from c1) where the
    circle of radius ``rad`` about c1's centre lies in the delta-annulus of c2."""
    wx = c1.center[0] - c2.center[0]
    wy = c1.center[1] - c2.center[1]
    D = math.hypot(wx, wy)
    lo = max(c2.radius - delta, 0.0) ** 2
    hi = (c2.radius + delta) ** 2
    if D == 0.0:
        return [(-math.pi, math.pi)] if lo <= rad * rad <= hi else []
    L = (lo - D * D - rad * rad) / (2 * D * rad)
    U = (hi - D * D - rad * rad) / (2 * D * rad)
    if U < -1 or L > 1:
        return []
    return [(math.acos(min(U, 1.0)), math.acos(max(L, -1.0)))]


def intersection_arc(c1: Circle, c2: Circle, delta: float, radial_samples: int = 129) -> tuple[float, float]:
    """Angular window (centre angle, half width) on c1 containing every point of
    C^delta(c1) intersected with C^delta(c2); centred on the tangency direction."""
    wx = c1.center[0] - c2.center[0]
    wy = c1.center[1] - c2.center[1]
    if math.hypot(wx, wy) == 0.0:
        return 0.0, math.pi
    # angle theta is measured from the direction of w = x1 - x2
    psi = math.atan2(wy, wx)
    theta_max = 0.0
    lo_any = math.pi
    for s in np.linspace(-delta, delta, radial_samples):
        rad = c1.radius + s
        if rad <= 0:
            continue
        for a_lo, a_hi in _annulus_angles(c1, c2, delta, rad):
            theta_max = max(theta_max, a_hi)
            lo_any = min(lo_any, a_lo)
    if theta_max == 0.0 and lo_any == math.pi:
        raise DegenerateInput("annuli do not meet")
    # the membership set is symmetric about psi (theta small) or psi + pi (theta near pi)
    if lo_any > math.pi / 2:
        return _wrap(psi + math.pi), math.pi - lo_any
    return psi, theta_max


def _tangency_angle(c1: Circle, c2: Circle) -> float:
    """Direction, seen from c1's centre, of the (near-)tangency point on c1."""
    wx = c1.center[0] - c2.center[0]
    wy = c1.center[1] - c2.center[1]
    if wx == 0.0 and wy == 0.0:
        return 0.0
    if c1.radius <= c2.radius:
        return math.atan2(wy, wx)
    return math.atan2(-wy, -wx)


def cover_intersection_rectangles(c1: Circle, c2: Circle, delta: float) -> list[TangencyRectangle]:
    """Rectangles on c1, at the pair's dyadic scale t, whose union contains the
    intersection of the two delta-annuli.

    The arcs tile the angular window of the intersection symmetrically about
    the tangency direction, with an odd count so that one rectangle sits exactly
    on the tangency point.
    """
    tan, dist = pair_metrics(c1, c2)
    if dist == 0.0:
        raise DegenerateInput("identical circles have no tangency scale")
    if tan > delta + ABS_TOL:
        raise DegenerateInput(f"tangency defect {tan} exceeds delta {delta}")
    t = max(dyadic_scale(dist), delta)
    centre = _tangency_angle(c1, c2)
    win_centre, win_half = intersection_arc(c1, c2, delta)
    # window limits measured relative to the tangency direction
    off = _wrap(win_centre - centre)
    reach = abs(off) + win_half
    step = math.sqrt(delta / t) / c1.radius
    k = max(0, int(math.ceil((reach - step / 2) / step - 1e-12)))
    rects = [TangencyRectangle(c1, _wrap(centre + i * step), delta, t) for i in range(-k, k + 1)]
    return rects


def _arc_distance_range(base: Circle, phi0: float, half: float, c: Circle) -> tuple[float, float]:
    """Min and max over the arc of |p - centre(c)|, in closed form."""
    wx = base.center[0] - c.center[0]
    wy = base.center[1] - c.center[1]
    D = math.hypot(wx, wy)
    vals = [math.hypot(wx + base.radius * math.cos(phi0 + s * half),
                       wy + base.radius * math.sin(phi0 + s * half)) for s in (-1.0, 1.0)]
    lo, hi = min(vals), max(vals)
    if D > 0:
        towards = math.atan2(-wy, -wx)
        if abs(_wrap(towards - phi0)) <= half:
            lo = min(lo, abs(D - base.radius))
        if abs(_wrap(towards + math.pi - phi0)) <= half:
            hi = max(hi, D + base.radius)
    return lo, hi


def arc_offset(rect: TangencyRectangle, c: Circle) -> float:
    """Largest distance from a point of the rectangle's core arc to circle c."""
    lo, hi = _arc_distance_range(rect.base, rect.arc_center_angle, rect.half_angle, c)
    return max(hi - c.radius, c.radius - lo)


def circle_tangent_to_rectangle(c: Circle, r: TangencyRectangle, a1: float = A1_DEFAULT) -> bool:
    """Whether the a1*delta neighbourhood of c contains the rectangle.

    Every point of the rectangle is within delta of its core arc and the
    distance to c grows by exactly that much in the worst direction, so the
    test reduces to the arc offset, which has a closed form.
    """
    return arc_offset(r, c) + r.delta <= a1 * r.delta + ABS_TOL


def _projected_span(rect: TangencyRectangle, star: Circle) -> tuple[float, float, float]:
    """Angular interval of the rectangle's core arc seen from star's centre,
    relative to its own centre, plus the arc's largest distance to star."""
    pts = [rect.base.point_at(rect.arc_center_angle + s * rect.half_angle) for s in (-1.0, 0.0, 1.0)]
    angs = [math.atan2(p[1] - star.center[1], p[0] - star.center[0]) for p in pts]
    ref = angs[1]
    rel = [_wrap(a - ref) for a in angs]
    return ref + min(rel), ref + max(rel), arc_offset(rect, star)


def rectangles_comparable(r1: TangencyRectangle, r2: TangencyRectangle, a0: float = A0_DEFAULT) -> bool:
    """Whether an (a0*delta, t)-rectangle contains both.

    Closed form: try the two base circles as the carrier of the big rectangle.
    Each small rectangle fits if its core arc stays within (a0-1)*delta of the
    carrier and the union of the angular shadows on the carrier fits in an arc
    of length sqrt(a0*delta/t).
    """
    if r1 == r2:
        return True
    delta = max(r1.delta, r2.delta)
    t = min(r1.t, r2.t)
    room = (a0 - 1.0) * delta + ABS_TOL
    for star in (r1.base, r2.base):
        spans = []
        ok = True
        for rect in (r1, r2):
            lo, hi, off = _projected_span(rect, star)
            if off > room:
                ok = False
                break
            spans.append((lo, hi))
        if not ok:
            continue
        ref = spans[0][0]
        los = [ref + _wrap(s[0] - ref) for s in spans]
        his = [lo + (s[1] - s[0]) for lo, s in zip(los, spans)]
        width = (max(his) - min(los)) * star.radius
        if width <= math.sqrt(a0 * delta / t) + ABS_TOL:
            return True
    return False


# ---------------------------------------------------------------------------
# rotational curvature
# ---------------------------------------------------------------------------


class DefiningKind(enum.Enum):
    SPHERE = "Sphere"
    PLANE = "Plane"


@dataclass(frozen=True)
class DefiningFunction:
    kind: DefiningKind
    dimension: int

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")

    def __call__(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.kind is DefiningKind.SPHERE:
            return float(np.linalg.norm(x - y) - 1.0)
        return float(x @ y - 1.0)


def _check_points(phi: DefiningFunction, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != (phi.dimension,) or y.shape != (phi.dimension,):
        raise ValueError(f"points must have dimension {phi.dimension}")
    return x, y


def curvature_matrix(phi: DefiningFunction, x, y) -> np.ndarray:
    """The bordered matrix [[Phi, d_y Phi], [d_x Phi, d_x d_y Phi]] in closed form."""
    x, y = _check_points(phi, x, y)
    d = phi.dimension
    m = np.empty((d + 1, d + 1))
    m[0, 0] = phi(x, y)
    if phi.kind is DefiningKind.SPHERE:
        v = x - y
        n = float(np.linalg.norm(v))
        if n == 0.0:
            raise DegenerateInput("sphere defining function is singular at x = y")
        u = v / n
        m[0, 1:] = -u
        m[1:, 0] = u
        m[1:, 1:] = -(np.eye(d) - np.outer(u, u)) / n
    else:
        m[0, 1:] = x
        m[1:, 0] = y
        m[1:, 1:] = np.eye(d)
    return m


def rotational_curvature_det(phi: DefiningFunction, x, y, tol: float = 1e-9) -> float:
    x, y = _check_points(phi, x, y)
    if abs(phi(x, y)) > tol:
        raise DegenerateInput("point is off the zero set of the defining function")
    return float(np.linalg.det(curvature_matrix(phi, x, y)))


def finite_difference_matrix(phi: DefiningFunction, x, y, step: float = 1e-5) -> np.ndarray:
    """Central-difference version of ``curvature_matrix``; used as an oracle."""
    x, y = _check_points(phi, x, y)
    d = phi.dimension
    m = np.empty((d + 1, d + 1))
    m[0, 0] = phi(x, y)
    eye = np.eye(d) * step
    for i in range(d):
        m[1 + i, 0] = (phi(x + eye[i], y) - phi(x - eye[i], y)) / (2 * step)
        m[0, 1 + i] = (phi(x, y + eye[i]) - phi(x, y - eye[i])) / (2 * step)
    for i in range(d):
        for j in range(d):
            m[1 + i, 1 + j] = (phi(x + eye[i], y + eye[j]) - phi(x + eye[i], y - eye[j])
                               - phi(x - eye[i], y + eye[j]) + phi(x - eye[i], y - eye[j])) / (4 * step * step)
    return m


def random_zero_set_point(phi: DefiningFunction, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A random (x, y) with Phi(x, y) = 0 up to rounding."""
    d = phi.dimension
    x = rng.normal(size=d)
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    if phi.kind is DefiningKind.SPHERE:
        return x, x - u
    # x . y = 1: pick y = x/|x|^2 + a vector orthogonal to x
    w = rng.normal(size=d)
    w -= (w @ x) / (x @ x) * x
    return x, x / (x @ x) + w


def pairwise_points(circles: Sequence[Circle]) -> np.ndarray:
    """(n, 3) array of (x, y, r) rows."""
    return np.array([[c.center[0], c.center[1], c.radius] for c in circles], dtype=float).reshape(-1, 3)
