"""Exact clustering of lattice tangencies into multi-fold tangency points."""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput
from ..families import CircleFamily, FamilyKind
from .pairs import lattice_tangency_vectors

MAX_LATTICE_SIDE = 40


def _pairs_along(occ: np.ndarray, v) -> np.ndarray:
    """Occupied p (as rows) with p + v occupied."""
    src, dst = [], []
    for size, s in zip(occ.shape, v):
        s = int(s)
        if abs(s) >= size:
            return np.empty((0, 3), np.int64)
        src.append(slice(max(0, -s), size - max(0, s)))
        dst.append(slice(max(0, s), size - max(0, -s)))
    hit = np.argwhere(occ[tuple(src)] & occ[tuple(dst)])
    return hit + np.array([max(0, -int(s)) for s in v])


def tangency_groups(family: CircleFamily) -> tuple[np.ndarray, np.ndarray]:
    """Groups of circles tangent at one point with centres on one ray from it.

    Returns ``(keys, sizes)``. A key is (X, Y, D, u, w): the tangency point is
    (X/D, Y/D) in lattice units, in lowest terms, and (u, w) the primitive
    direction from it towards the centres. Every exactly tangent pair lies in
    exactly one group, so sum(M (M - 1) / 2) equals the tangent-pair count.
    """
    if family.kind is not FamilyKind.LATTICE or family.lattice is None:
        raise DegenerateInput("multi-fold points need exact lattice coordinates")
    lat = family.lattice
    lo = lat.min(axis=0)
    span = lat.max(axis=0) - lo
    if span.max() > MAX_LATTICE_SIDE:
        raise ValueError(f"lattice side above {MAX_LATTICE_SIDE} is too large to cluster in memory")
    occ = np.zeros(tuple(span + 1), bool)
    occ[tuple((lat - lo).T)] = True
    dims = span + 1
    rows = []
    for v in lattice_tangency_vectors(span):
        small = _pairs_along(occ, v)
        if small.size == 0:
            continue
        big = small + v
        a, b, c = (int(x) for x in v)
        J, K, L = (big + lo).T
        qx = J * c - L * a
        qy = K * c - L * b
        g = np.gcd(np.gcd(qx, qy), c)
        ga = np.gcd(a, b)
        key = np.column_stack([qx // g, qy // g, c // g, np.full_like(g, a // ga), np.full_like(g, b // ga)])
        for member in (small, big):
            cid = (member[:, 0] * dims[1] + member[:, 1]) * dims[2] + member[:, 2]
            rows.append(np.column_stack([key, cid]))
    if not rows:
        return np.empty((0, 5), np.int64), np.empty(0, np.int64)
    rows = np.unique(np.concatenate(rows), axis=0)
    keys, sizes = np.unique(rows[:, :5], axis=0, return_counts=True)
    return keys, sizes


def mu_fold_points(family: CircleFamily, mu: int) -> int:
    """Tangency points with between mu and 10 mu circles on a common ray,
    counted once per ray (a point where k rays qualify counts k times).

    Pairs are the smallest tangency events, so a point needs at least two
    circles whatever mu is.
    """
    if mu < 1:
        raise ValueError("mu must be positive")
    _, sizes = tangency_groups(family)
    return int(np.count_nonzero((sizes >= max(mu, 2)) & (sizes <= 10 * mu)))
