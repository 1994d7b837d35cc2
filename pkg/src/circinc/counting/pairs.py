"""Tangent-pair counters and epsilon-tangent neighbourhoods."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .. import kernels
from ..errors import ToleranceRequired
from ..families import CircleFamily, FamilyKind
from ..geom_core import Circle, pair_metrics
from ..pyth import tangency_vectors

# smallest positive separation: excludes coincident circles from "tangent" pairs
_D_MIN = 5e-324


def _shift_overlap(occ: np.ndarray, v) -> int:
    """Number of occupied p with p + v also occupied."""
    src, dst = [], []
    for size, s in zip(occ.shape, v):
        s = int(s)
        if abs(s) >= size:
            return 0
        src.append(slice(max(0, -s), size - max(0, s)))
        dst.append(slice(max(0, s), size - max(0, -s)))
    return int(np.count_nonzero(occ[tuple(src)] & occ[tuple(dst)]))


def lattice_tangency_vectors(span) -> np.ndarray:
    """Difference vectors (dj, dk, dl), dl > 0, of exactly tangent lattice circles
    whose coordinates differ by at most ``span`` per axis."""
    sj, sk, sl = (int(s) for s in span)
    if sl < 1:
        return np.empty((0, 3), np.int64)
    v = tangency_vectors(sl, 1, sl)
    keep = (v[:, 2] > 0) & (np.abs(v[:, 0]) <= sj) & (np.abs(v[:, 1]) <= sk)
    return v[keep]


def count_exact_tangent_pairs(family: CircleFamily, tol: float | None = None, backend: str | None = None) -> int:
    """Unordered pairs with |x - y| = |r - s|.

    Lattice families are handled exactly: every solution vector of
    a^2 + b^2 = c^2 in range is probed against an occupancy bitmap of the
    lattice points. Other families need ``tol``, the admissible defect.
    """
    if family.kind is FamilyKind.LATTICE and family.lattice is not None:
        lat = family.lattice
        if len(lat) < 2:
            return 0
        lo = lat.min(axis=0)
        span = lat.max(axis=0) - lo
        occ = np.zeros(tuple(span + 1), bool)
        occ[tuple((lat - lo).T)] = True
        return sum(_shift_overlap(occ, v) for v in lattice_tangency_vectors(span))
    if tol is None:
        raise ToleranceRequired("exact tangency on floating coordinates needs a tolerance")
    return int(kernels.scan(family.xs, family.ys, family.rs, tan_max=tol, d_lo=_D_MIN, backend=backend))


def count_exact_tangent_pairs_bruteforce(family: CircleFamily) -> int:
    """O(n^2) oracle on integer lattice coordinates."""
    lat = family.lattice.astype(np.int64)
    total = 0
    for i in range(len(lat) - 1):
        dv = lat[i + 1:] - lat[i]
        total += int(np.count_nonzero((dv[:, 0] ** 2 + dv[:, 1] ** 2 == dv[:, 2] ** 2) & (dv[:, 2] != 0)))
    return total


def count_delta_tangent_pairs(family: CircleFamily, delta_frac: float, d_lo: float, d_hi: float,
                              backend: str | None = None) -> int:
    """Unordered pairs with defect strictly below delta_frac * family.delta and d in [d_lo, d_hi]."""
    if not delta_frac > 0:
        raise ValueError("delta_frac must be positive")
    tan_max = math.nextafter(delta_frac * family.delta, 0.0)
    return int(kernels.scan(family.xs, family.ys, family.rs, tan_max=tan_max,
                            d_lo=d_lo, d_hi=d_hi, backend=backend))


def pair_metric_arrays(xs, ys, rs, i, j) -> tuple[np.ndarray, np.ndarray]:
    """Defect and separation for index arrays i, j (same float formula as the kernels)."""
    rho = np.hypot(xs[i] - xs[j], ys[i] - ys[j])
    dr = np.abs(rs[i] - rs[j])
    return np.abs(rho - dr), rho + dr


def pairs_bruteforce(xs, ys, rs, *, tan_max=math.inf, d_lo=0.0, d_hi=math.inf, gap_max=math.inf,
                     groups=None) -> tuple[np.ndarray, np.ndarray]:
    """All i < j passing the scan filter, by exhaustive comparison."""
    xs, ys, rs = (np.asarray(a, float) for a in (xs, ys, rs))
    out_i, out_j = [], []
    for i in range(len(xs) - 1):
        j = np.arange(i + 1, len(xs))
        tan, d = pair_metric_arrays(xs, ys, rs, i, j)
        rho = np.hypot(xs[i] - xs[j], ys[i] - ys[j])
        m = (tan <= tan_max) & (d >= d_lo) & (d <= d_hi) & (rho - rs[i] - rs[j] <= gap_max)
        if groups is not None:
            m &= np.asarray(groups)[j] != groups[i]
        out_i.append(np.full(int(m.sum()), i))
        out_j.append(j[m])
    if not out_i:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64)


def eps_t_neighborhood(family: CircleFamily, c: Circle, eps: float, t: float,
                       delta: float | None = None) -> np.ndarray:
    """Indices of members that are eps-tangent to c at distance scale t:
    eps - delta <= Delta <= 2 eps, t/2 <= d <= t, and the delta-annuli meet."""
    delta = family.delta if delta is None else delta
    rho = np.hypot(family.xs - c.center[0], family.ys - c.center[1])
    dr = np.abs(family.rs - c.radius)
    tan = np.abs(rho - dr)
    d = rho + dr
    meets = (rho <= family.rs + c.radius + 2 * delta) & (rho >= dr - 2 * delta)
    m = (tan >= eps - delta) & (tan <= 2 * eps) & (d >= t / 2) & (d <= t) & meets
    return np.flatnonzero(m)


class NeighborhoodCount(NamedTuple):
    count: int
    bound: float


def two_circle_bound(c1: Circle, c2: Circle, eps: float, t: float, delta: float) -> float:
    """(eps t^2 / delta^3) * min(sqrt(eps/tau), eps/sqrt(beta tau))."""
    beta, tau = pair_metrics(c1, c2)
    if tau == 0:
        raise ValueError("the two circles coincide")
    second = eps / math.sqrt(beta * tau) if beta > 0 else math.inf
    return eps * t * t / delta ** 3 * min(math.sqrt(eps / tau), second)


def neighborhood_intersection_count(family: CircleFamily, c1: Circle, c2: Circle, eps: float,
                                    t: float) -> NeighborhoodCount:
    """Members lying in both eps-tangent neighbourhoods, with the two-circle bound."""
    if eps < family.delta:
        raise ValueError("eps must be at least the family's delta")
    if len(family) == 0:
        count = 0
    else:
        both = np.intersect1d(eps_t_neighborhood(family, c1, eps, t), eps_t_neighborhood(family, c2, eps, t))
        count = int(both.size)
    return NeighborhoodCount(count, two_circle_bound(c1, c2, eps, t, family.delta))


def bucket_of(tan: np.ndarray, d: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Dyadic (eps, t) labels: eps = delta when Delta <= 2 delta, else the power-of-two
    multiple of delta with eps < Delta <= 2 eps; t the dyadic scale of d. Each bucket
    satisfies eps - delta <= Delta <= 2 eps."""
    k = np.ceil(np.log2(np.maximum(tan, 2 * delta) / delta)) - 1
    eps = delta * np.exp2(k)
    # repair log2 rounding at exact powers of two
    eps = np.where(tan > 2 * eps, 2 * eps, eps)
    eps = np.where((tan <= eps) & (eps > delta), eps / 2, eps)
    t = np.exp2(np.ceil(np.log2(d)))
    t = np.where(t / 2 >= d, t / 2, t)
    t = np.where(t < d, 2 * t, t)
    return eps, t
