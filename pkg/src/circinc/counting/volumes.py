"""Monte Carlo volume of the set of circles tangent to three given circles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInput, HypothesisViolated
from ..geom_core import A0_DEFAULT, Circle
from ..rng import blocks, substream

# (x, y, r) sampling box: centres in [-4, 4]^2, radii in (0, 8]
BOX_LO = np.array([-4.0, -4.0, 0.0])
BOX_HI = np.array([4.0, 4.0, 8.0])
STRATUM_SCALE = 4.0  # parallelepipeds cover |Delta_i| <= 4 eps in the linearisation
_STREAM_STRIDE = 1 << 32


@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    bound: float
    trials: int
    seed: int
    strata: list = field(default_factory=list)


def common_tangent_circles(c1: Circle, c2: Circle, c3: Circle) -> list[np.ndarray]:
    """All (x, y, r) with |x - x_i| = |r - r_i| for i = 1, 2, 3.

    Differences of the squared equations are linear, leaving a line in
    (x, y, r) space; the remaining quadratic has at most two roots.
    """
    P = np.array([[*c.center, c.radius] for c in (c1, c2, c3)])
    M = np.diag([1.0, 1.0, -1.0])
    q = np.einsum("ij,jk,ik->i", P, M, P)
    A = 2 * (P[1:] - P[0]) @ M
    b = q[1:] - q[0]
    n = np.cross(A[0], A[1])
    if np.linalg.norm(n) < 1e-12 * max(1.0, np.abs(A).max() ** 2):
        raise DegenerateInput("the three circles have a continuum of common tangent circles")
    z0 = np.linalg.lstsq(A, b, rcond=None)[0]
    w = z0 - P[0]
    qa = n @ M @ n
    qb = 2 * (w @ M @ n)
    qc = w @ M @ w
    if abs(qa) < 1e-14:
        roots = [] if abs(qb) < 1e-14 else [-qc / qb]
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            roots = [(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)]
    return [z0 + s * n for s in roots]


def _conditions(z: np.ndarray, P: np.ndarray, eps: float, t: float, lam: float) -> np.ndarray:
    """Membership test for the three-circle set with delta = eps.

    Tangency points: the point of C in the direction where the defect is
    attained lies in both annuli, so it belongs to the intersection; the
    distance between two of them bounds the distance between intersections
    from above. Testing it against lam therefore accepts a superset.
    """
    x, y, r = z[:, 0], z[:, 1], z[:, 2]
    ok = (r > 0) & np.all((z >= BOX_LO) & (z <= BOX_HI), axis=1)
    pts = []
    for xi, yi, ri in P:
        vx, vy = x - xi, y - yi
        rho = np.hypot(vx, vy)
        dr = np.abs(r - ri)
        ok &= (np.abs(rho - dr) < eps) & (rho + dr > t)
        with np.errstate(invalid="ignore", divide="ignore"):
            ux, uy = vx / rho, vy / rho
        # internal tangency: the touching point is on the far side of the
        # larger circle's centre, seen from the smaller one
        s = np.where(r >= ri, -1.0, 1.0)
        pts.append((x + s * r * ux, y + s * r * uy))
    for i in range(3):
        for j in range(i + 1, 3):
            ok &= np.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]) >= lam
    return ok & np.isfinite(pts[0][0])


def _jacobian(z: np.ndarray, P: np.ndarray) -> np.ndarray:
    rows = []
    for xi, yi, ri in P:
        v = z[:2] - (xi, yi)
        rows.append([*(v / np.linalg.norm(v)), -math.copysign(1.0, z[2] - ri)])
    return np.array(rows)


def _in_parallelepiped(z, centre, G, half):
    return np.all(np.abs((z - centre) @ G.T) <= half, axis=1)


def three_circle_set_volume(c1: Circle, c2: Circle, c3: Circle, eps: float, t: float, lam: float,
                            trials: int, seed: int, a0: float = A0_DEFAULT) -> VolumeEstimate:
    """Stratified Monte Carlo volume of the circles eps-tangent to c1, c2, c3.

    Strata: around each exactly tangent circle, the parallelepiped where the
    linearised defects are at most 4 eps (sampled in defect coordinates);
    then the rest of the box, sampled uniformly with the parallelepipeds cut
    out. Each parallelepiped gets 45% of the trials, the remainder goes to
    the box.
    """
    if a0 * eps > t * lam * lam:
        raise HypothesisViolated(f"a0*eps = {a0 * eps} exceeds t*lam^2 = {t * lam * lam}")
    if trials < 10_000:
        raise ValueError("at least 10^4 trials are required")
    if c1 == c2 or c2 == c3 or c1 == c3:
        raise DegenerateInput("coincident circles")
    P = np.array([[*c.center, c.radius] for c in (c1, c2, c3)])
    half = STRATUM_SCALE * eps
    strata = []
    for z in common_tangent_circles(c1, c2, c3):
        if not (np.all(z >= BOX_LO) and np.all(z <= BOX_HI) and z[2] > 0):
            continue
        G = _jacobian(z, P)
        det = abs(np.linalg.det(G))
        if det < 1e-9:
            continue
        strata.append((z, G, np.linalg.inv(G), (2 * half) ** 3 / det))
    n_par = int(0.45 * trials) if strata else 0
    n_box = trials - n_par * len(strata)
    est, var = 0.0, 0.0
    info = []
    for k, (centre, G, Ginv, vol) in enumerate(strata):
        hits = 0
        for b, size in blocks(n_par):
            gen = substream(seed, k * _STREAM_STRIDE + b)
            z = centre + gen.uniform(-half, half, (size, 3)) @ Ginv.T
            ok = _conditions(z, P, eps, t, lam)
            for c_prev, G_prev, _, _ in strata[:k]:
                ok &= ~_in_parallelepiped(z, c_prev, G_prev, half)
            hits += int(ok.sum())
        p = hits / n_par
        est += vol * p
        var += vol * vol * p * (1 - p) / n_par
        info.append({"centre": centre.tolist(), "volume": vol, "hits": hits, "trials": n_par})
    box_vol = float(np.prod(BOX_HI - BOX_LO))
    hits = 0
    for b, size in blocks(n_box):
        gen = substream(seed, len(strata) * _STREAM_STRIDE + b)
        z = BOX_LO + gen.random((size, 3)) * (BOX_HI - BOX_LO)
        ok = _conditions(z, P, eps, t, lam)
        for c_prev, G_prev, _, _ in strata:
            ok &= ~_in_parallelepiped(z, c_prev, G_prev, half)
        hits += int(ok.sum())
    p = hits / n_box
    est += box_vol * p
    var += box_vol * box_vol * p * (1 - p) / n_box
    # the plug-in error is 0 for an empty stratum; keep the rule-of-three bound alongside
    info.append({"centre": None, "volume": box_vol, "hits": hits, "trials": n_box,
                 "upper95": box_vol * (3.0 / n_box if hits == 0 else p + 1.96 * math.sqrt(p * (1 - p) / n_box))})
    se = math.sqrt(var)
    return VolumeEstimate(est, se, max(0.0, est - 1.96 * se), est + 1.96 * se,
                          eps ** 3 / lam ** 3, trials, seed, info)


def generic_triple(gen: np.random.Generator, t: float, lam: float) -> tuple[Circle, Circle, Circle]:
    """Three circles internally tangent to one random circle.

    Their tangency points are at least 1.5 lam apart and each lies at distance
    d > 1.5 t from the common circle, so that circle is in the set.
    """
    while True:
        x0 = gen.uniform(0, 1, 2)
        r0 = gen.uniform(0.6, 1.0)
        theta = np.sort(gen.uniform(0, 2 * math.pi, 3))
        pts = r0 * np.column_stack([np.cos(theta), np.sin(theta)])
        gaps = [np.linalg.norm(pts[i] - pts[j]) for i in range(3) for j in range(i + 1, 3)]
        if min(gaps) < 1.5 * lam:
            continue
        out = []
        for th in theta:
            gap = gen.uniform(0.75 * t, 1.25 * t)
            ri = r0 - gap if gen.random() < 0.5 and r0 - gap > 0.05 else r0 + gap
            # centre on the ray so that |x_i - x0| = |r_i - r0|
            u = np.array([math.cos(th), math.sin(th)])
            xi = x0 + (r0 - ri) * u
            out.append(Circle(tuple(xi), ri))
        return tuple(out)
