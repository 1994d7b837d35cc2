"""Pure-numpy kernels. Same signatures and results as ``_numba``; slower, but with
no compiler dependency. Sequential kernels (the greedy net) fall back to plain
Python loops."""
from __future__ import annotations

import math

import numpy as np

from ._shared import net_ball

_CHUNK = 1 << 21


def _cell_pairs(cell_start, dims, offsets):
    """Yield (offset, a_cells, b_cells) for occupied cell pairs along each offset."""
    nx, ny, nr = (int(v) for v in dims)
    counts = np.diff(cell_start)
    occ = np.flatnonzero(counts)
    ox_, oy_, or_ = occ // (ny * nr), (occ // nr) % ny, occ % nr
    for off in offsets:
        bx, by, br = ox_ + off[0], oy_ + off[1], or_ + off[2]
        ok = (bx >= 0) & (by >= 0) & (br >= 0) & (bx < nx) & (by < ny) & (br < nr)
        a = occ[ok]
        b = (bx[ok] * ny + by[ok]) * nr + br[ok]
        keep = counts[b] > 0
        yield off, a[keep], b[keep]


def _expand(cell_start, order, a, b, same):
    """Enumerate all member pairs of the cell pairs (a[k], b[k]), in chunks."""
    na = cell_start[a + 1] - cell_start[a]
    nb = cell_start[b + 1] - cell_start[b]
    tot = na * nb
    ptr = np.concatenate(([0], np.cumsum(tot)))
    total = int(ptr[-1])
    for s in range(0, total, _CHUNK):
        k = np.arange(s, min(total, s + _CHUNK), dtype=np.int64)
        q = np.searchsorted(ptr, k, side="right") - 1
        local = k - ptr[q]
        ia = cell_start[a[q]] + local // nb[q]
        ib = cell_start[b[q]] + local % nb[q]
        if same:
            m = ib > ia
            ia, ib = ia[m], ib[m]
        yield order[ia], order[ib]


def _filter(x, y, r, grp, i, j, tan_max, d_lo, d_hi, gap_max, cross_only):
    rho = np.hypot(x[i] - x[j], y[i] - y[j])
    dr = np.abs(r[i] - r[j])
    d = rho + dr
    m = (d >= d_lo) & (d <= d_hi) & (np.abs(rho - dr) <= tan_max) & (rho - r[i] - r[j] <= gap_max)
    if cross_only:
        m &= grp[i] != grp[j]
    return m


def _scan(x, y, r, grp, order, cell_start, dims, offsets,
          tan_max, d_lo, d_hi, gap_max, cross_only, collect):
    total = 0
    out_i, out_j = [], []
    for off, a, b in _cell_pairs(cell_start, dims, offsets):
        if a.size == 0:
            continue
        same = off[0] == 0 and off[1] == 0 and off[2] == 0
        for i, j in _expand(cell_start, order, a, b, same):
            m = _filter(x, y, r, grp, i, j, tan_max, d_lo, d_hi, gap_max, cross_only)
            total += int(m.sum())
            if collect:
                out_i.append(np.minimum(i[m], j[m]))
                out_j.append(np.maximum(i[m], j[m]))
    if collect:
        if not out_i:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        return np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64)
    return total


def scan_count(x, y, r, grp, order, cell_start, dims, offsets,
               tan_max, d_lo, d_hi, gap_max, cross_only):
    return _scan(x, y, r, grp, order, cell_start, dims, offsets,
                 tan_max, d_lo, d_hi, gap_max, cross_only, False)


def scan_pairs(x, y, r, grp, order, cell_start, dims, offsets,
               tan_max, d_lo, d_hi, gap_max, cross_only):
    return _scan(x, y, r, grp, order, cell_start, dims, offsets,
                 tan_max, d_lo, d_hi, gap_max, cross_only, True)


def _add_ranges(diff, i0, i1, m):
    ok = i1 >= i0
    i0, i1 = i0[ok], i1[ok]
    full = (i1 - i0 + 1) >= m
    np.add.at(diff, np.zeros(int(full.sum()), np.int64), 1)
    np.add.at(diff, np.full(int(full.sum()), m, np.int64), -1)
    i0, i1 = i0[~full], i1[~full]
    s = np.mod(i0, m)
    e = s + (i1 - i0)
    wrap = e >= m
    np.add.at(diff, s, 1)
    np.add.at(diff, np.where(wrap, m, e + 1), -1)
    np.add.at(diff, np.zeros(int(wrap.sum()), np.int64), 1)
    np.add.at(diff, e[wrap] - m + 1, -1)


def arc_multiplicity(xc, yc, rc, svals, m, X, Y, R, delta):
    ns = svals.shape[0]
    out = np.zeros((ns, m), np.int32)
    dphi = 2.0 * math.pi / m
    wx = xc - X
    wy = yc - Y
    D = np.hypot(wx, wy)
    lo = np.maximum(R - delta, 0.0) ** 2
    hi = (R + delta) * (R + delta)
    psi = np.arctan2(wy, wx)
    centred = D == 0.0
    for si in range(ns):
        rr = rc + svals[si]
        full = int(np.count_nonzero(centred & (lo <= rr * rr) & (rr * rr <= hi)))
        with np.errstate(divide="ignore", invalid="ignore"):
            den = 2.0 * D * rr
            L = (lo - D * D - rr * rr) / den
            U = (hi - D * D - rr * rr) / den
        ok = ~centred & ~(U < -1.0) & ~(L > 1.0)
        a1 = np.arccos(np.minimum(U[ok], 1.0))
        a2 = np.arccos(np.maximum(L[ok], -1.0))
        p = psi[ok]
        i0 = np.ceil((p + a1) / dphi - 1e-9).astype(np.int64)
        i1 = np.floor((p + a2) / dphi + 1e-9).astype(np.int64)
        j0 = np.ceil((p - a2) / dphi - 1e-9).astype(np.int64)
        j1 = np.floor((p - a1) / dphi + 1e-9).astype(np.int64)
        j1 = np.where(a1 == 0.0, np.minimum(j1, i0 - 1), j1)
        j0 = np.where(a2 >= math.pi, np.maximum(j0, i1 + 1 - m), j0)
        diff = np.zeros(m + 1, np.int64)
        _add_ranges(diff, i0, i1, m)
        _add_ranges(diff, j0, j1, m)
        out[si] = np.cumsum(diff[:m]) + full
    return out


def annulus_raster(X, Y, R, delta, x0, y0, h, nx, ny):
    """Same contract as the compiled version; evaluates the exact predicate on
    every grid point of each annulus' bounding box rows, one circle at a time."""
    counts = np.zeros((nx, ny), np.int32)
    for c in range(X.shape[0]):
        cx, cy, rad = X[c], Y[c], R[c]
        outer = rad + delta
        i_lo = max(0, int(math.floor((cx - outer - x0) / h)))
        i_hi = min(nx - 1, int(math.ceil((cx + outer - x0) / h)))
        j_lo = max(0, int(math.floor((cy - outer - y0) / h)))
        j_hi = min(ny - 1, int(math.ceil((cy + outer - y0) / h)))
        if i_hi < i_lo or j_hi < j_lo:
            continue
        px = x0 + np.arange(i_lo, i_hi + 1) * h
        py = y0 + np.arange(j_lo, j_hi + 1) * h
        dist = np.hypot(px[:, None] - cx, py[None, :] - cy)
        counts[i_lo:i_hi + 1, j_lo:j_hi + 1] += np.abs(dist - rad) <= delta
    return counts


def greedy_net(perm, x0, y0, r0, step, nx, ny, nr, delta):
    ball = net_ball(step, delta)
    blocked = np.zeros(nx * ny * nr, bool)
    accepted = []
    for k in perm.tolist():
        if blocked[k]:
            continue
        accepted.append(k)
        j = np.array([k // (ny * nr), (k // nr) % ny, k % nr]) + ball
        ok = ((j >= 0) & (j < np.array([nx, ny, nr]))).all(axis=1)
        j = j[ok]
        blocked[(j[:, 0] * ny + j[:, 1]) * nr + j[:, 2]] = True
    return np.asarray(accepted, dtype=np.int64)


def correlate_offsets_2d(cells, offsets, weights, shape0, shape1):
    out = np.zeros((shape0, shape1), np.float64)
    for k in range(offsets.shape[0]):
        p = cells - offsets[k]
        ok = (p[:, 0] >= 0) & (p[:, 0] < shape0) & (p[:, 1] >= 0) & (p[:, 1] < shape1)
        np.add.at(out, (p[ok, 0], p[ok, 1]), weights[k])
    return out


def correlate_offsets_3d(cells, offsets, weights, shape0, shape1, shape2):
    out = np.zeros((shape0, shape1, shape2), np.float64)
    for k in range(offsets.shape[0]):
        p = cells - offsets[k]
        ok = ((p >= 0) & (p < np.array([shape0, shape1, shape2]))).all(axis=1)
        np.add.at(out, (p[ok, 0], p[ok, 1], p[ok, 2]), weights[k])
    return out


def _arc_range(xb, yb, rb, phi0, half, cx, cy):
    ux, uy = math.cos(phi0), math.sin(phi0)
    ends = [np.hypot(xb + rb * math.cos(phi0 + s * half) - cx, yb + rb * math.sin(phi0 + s * half) - cy)
            for s in (-1.0, 1.0)]
    lo = np.minimum(ends[0], ends[1])
    hi = np.maximum(ends[0], ends[1])
    wx = cx - xb
    wy = cy - yb
    D = np.hypot(wx, wy)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_to = (wx * ux + wy * uy) / D
    cosh = math.cos(half)
    pos = D > 0.0
    lo = np.where(pos & (cos_to >= cosh), np.minimum(lo, np.abs(D - rb)), lo)
    hi = np.where(pos & (-cos_to >= cosh), np.maximum(hi, D + rb), hi)
    return lo, hi


def rect_tangent_counts(xb, yb, rb, phi0, half, X, Y, R, slack):
    out = np.zeros(xb.shape[0], np.int64)
    px = xb + rb * np.cos(phi0)
    py = yb + rb * np.sin(phi0)
    for q in range(xb.shape[0]):
        cand = np.flatnonzero(np.abs(np.hypot(px[q] - X, py[q] - Y) - R) <= slack)
        if cand.size == 0:
            continue
        lo, hi = _arc_range(xb[q], yb[q], rb[q], phi0[q], half[q], X[cand], Y[cand])
        out[q] = int(np.count_nonzero((hi <= R[cand] + slack) & (lo >= R[cand] - slack)))
    return out


# ---------------------------------------------------------------------------
# greedy incomparable rectangles
# ---------------------------------------------------------------------------


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def _dist_range(bx, by, br, phi, half, cx, cy):
    wx = bx - cx
    wy = by - cy
    D = math.hypot(wx, wy)
    v0 = math.hypot(wx + br * math.cos(phi - half), wy + br * math.sin(phi - half))
    v1 = math.hypot(wx + br * math.cos(phi + half), wy + br * math.sin(phi + half))
    lo = min(v0, v1)
    hi = max(v0, v1)
    if D > 0.0:
        towards = math.atan2(-wy, -wx)
        if abs(_wrap(towards - phi)) <= half:
            lo = min(lo, abs(D - br))
        if abs(_wrap(towards + math.pi - phi)) <= half:
            hi = max(hi, D + br)
    return lo, hi


def _span(bx, by, br, phi, half, sx, sy, sr):
    ref = math.atan2(by + br * math.sin(phi) - sy, bx + br * math.cos(phi) - sx)
    a0 = _wrap(math.atan2(by + br * math.sin(phi - half) - sy, bx + br * math.cos(phi - half) - sx) - ref)
    a1 = _wrap(math.atan2(by + br * math.sin(phi + half) - sy, bx + br * math.cos(phi + half) - sx) - ref)
    lo_rel = min(0.0, min(a0, a1))
    hi_rel = max(0.0, max(a0, a1))
    dlo, dhi = _dist_range(bx, by, br, phi, half, sx, sy)
    return ref + lo_rel, ref + hi_rel, max(dhi - sr, sr - dlo)


def comparable(x1, y1, r1, p1, h1, x2, y2, r2, p2, h2, room, width_max):
    """Closed-form comparability of two rectangles with equal delta and t."""
    if x1 == x2 and y1 == y2 and r1 == r2 and p1 == p2 and h1 == h2:
        return True
    for k in range(2):
        if k == 0:
            sx, sy, sr = x1, y1, r1
        else:
            sx, sy, sr = x2, y2, r2
        lo1, hi1, off1 = _span(x1, y1, r1, p1, h1, sx, sy, sr)
        if off1 > room:
            continue
        lo2, hi2, off2 = _span(x2, y2, r2, p2, h2, sx, sy, sr)
        if off2 > room:
            continue
        l2 = lo1 + _wrap(lo2 - lo1)
        u2 = l2 + (hi2 - lo2)
        width = (max(hi1, u2) - min(lo1, l2)) * sr
        if width <= width_max:
            return True
    return False


def greedy_incomparable(bx, by, br, phi, half, room, width_max, cell, x0, y0, ncx, ncy):
    """Keep rectangles in the given order unless comparable to one already kept.

    Kept rectangles are bucketed by the cell of their centre point; only the
    3x3 block of cells around a candidate is searched.
    """
    n = bx.shape[0]
    head = np.full(ncx * ncy, -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    keep = np.zeros(n, bool)
    for q in range(n):
        px = bx[q] + br[q] * math.cos(phi[q])
        py = by[q] + br[q] * math.sin(phi[q])
        ix = min(max(int(math.floor((px - x0) / cell)), 0), ncx - 1)
        iy = min(max(int(math.floor((py - y0) / cell)), 0), ncy - 1)
        hit = False
        for ax in range(max(ix - 1, 0), min(ix + 2, ncx)):
            for ay in range(max(iy - 1, 0), min(iy + 2, ncy)):
                o = head[ax * ncy + ay]
                while o >= 0 and not hit:
                    hit = comparable(bx[q], by[q], br[q], phi[q], half[q],
                                     bx[o], by[o], br[o], phi[o], half[o], room, width_max)
                    o = nxt[o]
                if hit:
                    break
            if hit:
                break
        if hit:
            continue
        keep[q] = True
        c = ix * ncy + iy
        nxt[q] = head[c]
        head[c] = q
    return keep
