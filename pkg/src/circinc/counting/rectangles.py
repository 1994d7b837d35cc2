"""Typed (delta, t)-rectangles of a bipartite pair, good rectangles, and the
incidence bound they are compared against."""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .. import kernels
from ..families import BipartitePair, CircleFamily, concat
from ..geom_core import (A0_DEFAULT, A1_DEFAULT, ABS_TOL, Circle, TangencyRectangle,
                         circle_tangent_to_rectangle)


class RectMode(enum.Enum):
    ALL = "All"
    GOOD_ONLY = "GoodOnly"


class RectangleTypeRecord(NamedTuple):
    rectangle: TangencyRectangle
    mu: int
    nu: int


def is_good(mu: int, nu: int, A: float) -> bool:
    """Type (>=1, >=1) but neither (>=A^2, >=1) nor (>=1, >=A^2)."""
    return mu >= 1 and nu >= 1 and mu < A * A and nu < A * A


def wolff_bound(m: int, n: int, mu: int, nu: int, eps: float, C_eps: float) -> float:
    if min(m, n, mu, nu) < 1:
        raise ValueError("all counts must be at least 1")
    mn = m * n
    return C_eps * mn ** eps * ((mn / (mu * nu)) ** 0.75 + m / mu + n / nu)


def _tangent_pairs(white: CircleFamily, black: CircleFamily, delta: float, backend) -> tuple[np.ndarray, np.ndarray]:
    """delta-tangent (w, b) index pairs: defect <= delta and the annuli meet."""
    both = concat([white, black])
    groups = np.r_[np.zeros(len(white), np.int64), np.ones(len(black), np.int64)]
    i, j = kernels.scan(both.xs, both.ys, both.rs, tan_max=delta, gap_max=2 * delta,
                        groups=groups, collect=True, backend=backend)
    return i, j - len(white)


@dataclass(frozen=True)
class _Candidates:
    w: np.ndarray
    phi: np.ndarray
    t: float


def _candidates(white, black, delta, t, backend) -> _Candidates:
    """One rectangle per (w, snapped tangency angle).

    The tangency direction of each pair is rounded to a grid of one half-angle
    on w, so the tangency point lies within a quarter arc of the centre.
    """
    wi, bi = _tangent_pairs(white, black, delta, backend)
    wr = white.rs[wi]
    vx, vy = white.xs[wi] - black.xs[bi], white.ys[wi] - black.ys[bi]
    # tangency direction seen from w: towards b's side when w is the larger circle
    sign = np.where(wr <= black.rs[bi], 1.0, -1.0)
    phi = np.arctan2(sign * vy, sign * vx)
    step = 0.5 * math.sqrt(delta / t) / wr
    key = np.round(phi / step).astype(np.int64)
    uniq, first = np.unique(np.column_stack([wi, key]), axis=0, return_index=True)
    snapped = uniq[:, 1] * step[first]
    return _Candidates(uniq[:, 0], snapped, t)


def _counts(fam: CircleFamily, cand_fam: CircleFamily, c: _Candidates, delta: float, slack: float, backend):
    half = 0.5 * math.sqrt(delta / c.t) / cand_fam.rs[c.w]
    return kernels.rect_tangent_counts(
        np.ascontiguousarray(cand_fam.xs[c.w]), np.ascontiguousarray(cand_fam.ys[c.w]),
        np.ascontiguousarray(cand_fam.rs[c.w]), np.ascontiguousarray(c.phi), np.ascontiguousarray(half),
        np.ascontiguousarray(fam.xs), np.ascontiguousarray(fam.ys), np.ascontiguousarray(fam.rs),
        float(slack), backend=backend)


class _CentreHash:
    def __init__(self, cell: float):
        self.cell = cell
        self.grid: dict[tuple[int, int], list[TangencyRectangle]] = defaultdict(list)

    def _key(self, p):
        return int(math.floor(p[0] / self.cell)), int(math.floor(p[1] / self.cell))

    def near(self, p):
        kx, ky = self._key(p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                yield from self.grid.get((kx + dx, ky + dy), ())

    def add(self, rect: TangencyRectangle):
        self.grid[self._key(rect.center_point)].append(rect)


def type_rectangles(pair: BipartitePair, delta: float, mode: RectMode = RectMode.ALL, A: float = 8.0,
                    a0: float = A0_DEFAULT, a1: float = A1_DEFAULT,
                    backend: str | None = None) -> list[RectangleTypeRecord]:
    """Pairwise incomparable rectangles built from the delta-tangent (w, b) pairs,
    each with its counts (mu, nu) of tangent W and B circles.

    All rectangles live at the pair's scale t. Every tangent pair proposes the
    rectangle on w at its tangency direction (snapped, see ``_candidates``). Candidates are taken greedily by
    descending mu + nu (ties: angle, then centre) and kept when incomparable
    with everything kept so far. ``RectMode.GOOD_ONLY`` keeps good rectangles
    for the given A.
    """
    if not 0 < delta <= pair.t:
        raise ValueError("need 0 < delta <= t")
    white, black = pair.white, pair.black
    if len(white) == 0 or len(black) == 0:
        return []
    cand = _candidates(white, black, delta, pair.t, backend)
    if cand.w.size == 0:
        return []
    slack = (a1 - 1.0) * delta
    mu = _counts(white, white, cand, delta, slack, backend)
    nu = _counts(black, white, cand, delta, slack, backend)
    wr = white.rs[cand.w]
    bx, by = white.xs[cand.w], white.ys[cand.w]
    cx = bx + wr * np.cos(cand.phi)
    cy = by + wr * np.sin(cand.phi)
    order = np.lexsort((cy, cx, cand.phi, -(mu + nu)))
    half = 0.5 * math.sqrt(delta / cand.t) / wr
    cell = 1.1 * math.sqrt(a0 * delta / cand.t) + 2 * a0 * delta
    x0, y0 = cx.min() - cell, cy.min() - cell
    ncx = int((cx.max() - x0) / cell) + 2
    ncy = int((cy.max() - y0) / cell) + 2
    args = [np.ascontiguousarray(v[order]) for v in (bx, by, wr, cand.phi, half)]
    keep = kernels.greedy_incomparable(*args, (a0 - 1.0) * delta + ABS_TOL,
                                       math.sqrt(a0 * delta / cand.t) + ABS_TOL,
                                       cell, x0, y0, ncx, ncy, backend=backend)
    out = [RectangleTypeRecord(TangencyRectangle(white.circle(int(cand.w[q])), float(cand.phi[q]), delta, cand.t),
                               int(mu[q]), int(nu[q])) for q in order[keep].tolist()]
    if mode is RectMode.GOOD_ONLY:
        out = [rec for rec in out if is_good(rec.mu, rec.nu, A)]
    return out


def uncovered_tangent_pairs(pair: BipartitePair, records: list[RectangleTypeRecord], delta: float,
                            a1: float | None = None, a0: float = A0_DEFAULT,
                            backend: str | None = None) -> list[tuple[int, int]]:
    """delta-tangent (w, b) pairs with no output rectangle tangent to both circles.

    A candidate dropped by the greedy pass shares an (a0 delta, t)-rectangle
    with a kept one, so its pair is only guaranteed to touch that kept
    rectangle at a looser constant; ``a1`` defaults to a0 + 2 for that reason.
    """
    a1 = a0 + 2.0 if a1 is None else a1
    wi, bi = _tangent_pairs(pair.white, pair.black, delta, backend)
    if not records:
        return list(zip(wi.tolist(), bi.tolist()))
    cell = max(r.rectangle.arc_length for r in records) + 2 * a1 * delta
    grid = _CentreHash(cell)
    for rec in records:
        grid.add(rec.rectangle)
    missing = []
    for w, b in zip(wi.tolist(), bi.tolist()):
        cw, cb = pair.white.circle(w), pair.black.circle(b)
        found = False
        for rect in _near_circle_pair(grid, cw, cb):
            if circle_tangent_to_rectangle(cw, rect, a1) and circle_tangent_to_rectangle(cb, rect, a1):
                found = True
                break
        if not found:
            missing.append((w, b))
    return missing


def _near_circle_pair(grid: _CentreHash, cw: Circle, cb: Circle):
    vx, vy = cw.center[0] - cb.center[0], cw.center[1] - cb.center[1]
    s = 1.0 if cw.radius <= cb.radius else -1.0
    p = cw.point_at(math.atan2(s * vy, s * vx))
    seen = set()
    # a rectangle tangent to both circles sits near their tangency point, but
    # with a large defect the touching region is long; walk along it
    for rect in grid.near(p):
        if id(rect) not in seen:
            seen.add(id(rect))
            yield rect
    for rect in (r for cell in grid.grid.values() for r in cell):
        if id(rect) not in seen:
            seen.add(id(rect))
            yield rect


def incidence_count(family: CircleFamily, delta: float, k: float = 5.0, backend: str | None = None) -> int:
    """Ordered pairs i != j of (k delta)-tangent circles."""
    return 2 * int(kernels.scan(family.xs, family.ys, family.rs, tan_max=k * delta,
                                gap_max=2 * k * delta, d_lo=5e-324, backend=backend))
