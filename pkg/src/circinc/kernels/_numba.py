"""Compiled kernels. Every function here has a twin in ``_numpy`` with the same
signature and the same result (bit-for-bit on integer outputs)."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._shared import net_ball

# ---------------------------------------------------------------------------
# cell-list pair scan
# ---------------------------------------------------------------------------


@njit(cache=True)
def _scan(x, y, r, grp, order, cell_start, dims, offsets,
          tan_max, d_lo, d_hi, gap_max, cross_only, fill, out_i, out_j):
    nx, ny, nr = dims[0], dims[1], dims[2]
    count = 0
    for cx in range(nx):
        for cy in range(ny):
            for cr in range(nr):
                ca = (cx * ny + cy) * nr + cr
                a0 = cell_start[ca]
                a1 = cell_start[ca + 1]
                if a0 == a1:
                    continue
                for k in range(offsets.shape[0]):
                    bx = cx + offsets[k, 0]
                    by = cy + offsets[k, 1]
                    br = cr + offsets[k, 2]
                    if bx < 0 or by < 0 or br < 0 or bx >= nx or by >= ny or br >= nr:
                        continue
                    cb = (bx * ny + by) * nr + br
                    b0 = cell_start[cb]
                    b1 = cell_start[cb + 1]
                    same = cb == ca
                    for ia in range(a0, a1):
                        i = order[ia]
                        jstart = ia + 1 if same else b0
                        for ib in range(jstart, b1):
                            j = order[ib]
                            if cross_only and grp[i] == grp[j]:
                                continue
                            rho = math.hypot(x[i] - x[j], y[i] - y[j])
                            dr = abs(r[i] - r[j])
                            d = rho + dr
                            if d < d_lo or d > d_hi:
                                continue
                            if abs(rho - dr) > tan_max:
                                continue
                            if rho - r[i] - r[j] > gap_max:
                                continue
                            if fill:
                                if i < j:
                                    out_i[count] = i
                                    out_j[count] = j
                                else:
                                    out_i[count] = j
                                    out_j[count] = i
                            count += 1
    return count


def scan_count(x, y, r, grp, order, cell_start, dims, offsets,
               tan_max, d_lo, d_hi, gap_max, cross_only):
    empty = np.empty(0, np.int64)
    return int(_scan(x, y, r, grp, order, cell_start, dims, offsets,
                     tan_max, d_lo, d_hi, gap_max, cross_only, False, empty, empty))


def scan_pairs(x, y, r, grp, order, cell_start, dims, offsets,
               tan_max, d_lo, d_hi, gap_max, cross_only):
    n = scan_count(x, y, r, grp, order, cell_start, dims, offsets,
                   tan_max, d_lo, d_hi, gap_max, cross_only)
    out_i = np.empty(n, np.int64)
    out_j = np.empty(n, np.int64)
    _scan(x, y, r, grp, order, cell_start, dims, offsets,
          tan_max, d_lo, d_hi, gap_max, cross_only, True, out_i, out_j)
    return out_i, out_j


# ---------------------------------------------------------------------------
# multiplicity along one annulus
# ---------------------------------------------------------------------------


@njit(cache=True)
def _add_range(diff, i0, i1, m):
    # inclusive index range [i0, i1] on a periodic grid of m points
    if i1 < i0:
        return
    if i1 - i0 + 1 >= m:
        diff[0] += 1
        diff[m] -= 1
        return
    s = i0 % m
    e = s + (i1 - i0)
    if e < m:
        diff[s] += 1
        diff[e + 1] -= 1
    else:
        diff[s] += 1
        diff[m] -= 1
        diff[0] += 1
        diff[e - m + 1] -= 1


@njit(cache=True)
def arc_multiplicity(xc, yc, rc, svals, m, X, Y, R, delta):
    """counts[s, i] = number of annuli containing xc + (rc+s)(cos, sin)(2 pi i/m)."""
    ns = svals.shape[0]
    out = np.zeros((ns, m), np.int32)
    dphi = 2.0 * math.pi / m
    for si in range(ns):
        rr = rc + svals[si]
        diff = np.zeros(m + 1, np.int64)
        full = 0
        for c in range(X.shape[0]):
            wx = xc - X[c]
            wy = yc - Y[c]
            D = math.hypot(wx, wy)
            lo = max(R[c] - delta, 0.0)
            lo *= lo
            hi = (R[c] + delta) * (R[c] + delta)
            if D == 0.0:
                q = rr * rr
                if lo <= q <= hi:
                    full += 1
                continue
            den = 2.0 * D * rr
            L = (lo - D * D - rr * rr) / den
            U = (hi - D * D - rr * rr) / den
            if U < -1.0 or L > 1.0:
                continue
            a1 = math.acos(min(U, 1.0))
            a2 = math.acos(max(L, -1.0))
            psi = math.atan2(wy, wx)
            # the point sits at angle psi + theta from the annulus centre with cos(theta) in [L, U]
            i0 = math.ceil((psi + a1) / dphi - 1e-9)
            i1 = math.floor((psi + a2) / dphi + 1e-9)
            _add_range(diff, i0, i1, m)
            j0 = math.ceil((psi - a2) / dphi - 1e-9)
            j1 = math.floor((psi - a1) / dphi + 1e-9)
            if a1 == 0.0:
                j1 = min(j1, i0 - 1)
            if a2 >= math.pi:
                j0 = max(j0, i1 + 1 - m)
            _add_range(diff, j0, j1, m)
        acc = 0
        for i in range(m):
            acc += diff[i]
            out[si, i] = acc + full
    return out


# ---------------------------------------------------------------------------
# annulus rasterisation on a regular grid
# ---------------------------------------------------------------------------


@njit(cache=True)
def _inside(px, py, cx, cy, rad, delta):
    return abs(math.hypot(px - cx, py - cy) - rad) <= delta


@njit(cache=True)
def _repair(i_lo, i_hi, s0, s1, py, x0, h, cx, cy, rad, delta):
    # move the estimated endpoints of one membership run onto the exact predicate
    i_lo = min(max(i_lo, s0), s1 + 1)
    i_hi = min(max(i_hi, s0 - 1), s1)
    while i_lo > s0 and _inside(x0 + (i_lo - 1) * h, py, cx, cy, rad, delta):
        i_lo -= 1
    while i_lo <= i_hi and not _inside(x0 + i_lo * h, py, cx, cy, rad, delta):
        i_lo += 1
    while i_hi < s1 and i_hi >= i_lo - 1 and _inside(x0 + (i_hi + 1) * h, py, cx, cy, rad, delta):
        i_hi += 1
    while i_hi >= i_lo and not _inside(x0 + i_hi * h, py, cx, cy, rad, delta):
        i_hi -= 1
    return i_lo, i_hi


@njit(cache=True)
def annulus_raster(X, Y, R, delta, x0, y0, h, nx, ny):
    """counts[i, j] = number of annuli ||p - c| - r| <= delta containing (x0 + i h, y0 + j h)."""
    counts = np.zeros((nx, ny), np.int32)
    for c in range(X.shape[0]):
        cx, cy, rad = X[c], Y[c], R[c]
        outer = rad + delta
        inner = rad - delta
        j_lo = max(0, int(math.floor((cy - outer - y0) / h)))
        j_hi = min(ny - 1, int(math.ceil((cy + outer - y0) / h)))
        split = int(math.ceil((cx - x0) / h))  # first column with x >= cx
        for jj in range(j_lo, j_hi + 1):
            py = y0 + jj * h
            dy = py - cy
            q_out = outer * outer - dy * dy
            if q_out < 0.0:
                continue
            w_out = math.sqrt(q_out)
            w_in = 0.0
            if inner > 0.0 and inner * inner - dy * dy > 0.0:
                w_in = math.sqrt(inner * inner - dy * dy)
            # right half: x >= cx
            lo, hi = _repair(int(math.ceil((cx + w_in - x0) / h)),
                             int(math.floor((cx + w_out - x0) / h)),
                             max(split, 0), nx - 1, py, x0, h, cx, cy, rad, delta)
            for ii in range(lo, hi + 1):
                counts[ii, jj] += 1
            # left half: x < cx
            lo, hi = _repair(int(math.ceil((cx - w_out - x0) / h)),
                             int(math.floor((cx - w_in - x0) / h)),
                             0, min(split, nx) - 1, py, x0, h, cx, cy, rad, delta)
            for ii in range(lo, hi + 1):
                counts[ii, jj] += 1
    return counts


# ---------------------------------------------------------------------------
# greedy delta-net over a shuffled candidate grid
# ---------------------------------------------------------------------------


@njit(cache=True)
def _greedy_net(perm, nx, ny, nr, ball):
    blocked = np.zeros(nx * ny * nr, np.bool_)
    accepted = np.empty(perm.shape[0], np.int64)
    na = 0
    for t in range(perm.shape[0]):
        k = perm[t]
        if blocked[k]:
            continue
        accepted[na] = k
        na += 1
        ix = k // (ny * nr)
        iy = (k // nr) % ny
        ir = k % nr
        for q in range(ball.shape[0]):
            jx = ix + ball[q, 0]
            jy = iy + ball[q, 1]
            jr = ir + ball[q, 2]
            if 0 <= jx < nx and 0 <= jy < ny and 0 <= jr < nr:
                blocked[(jx * ny + jy) * nr + jr] = True
    return accepted[:na].copy()


def greedy_net(perm, x0, y0, r0, step, nx, ny, nr, delta):
    """Accept candidates in ``perm`` order when their d-distance to every
    accepted point exceeds delta. Candidate k sits at grid index
    (k // (ny*nr), (k // nr) % ny, k % nr). Both candidates and accepted
    points live on one grid, so rejection is an exact lookup in a mask of
    grid points within delta of an accepted one."""
    return _greedy_net(perm, int(nx), int(ny), int(nr), net_ball(step, delta))


# ---------------------------------------------------------------------------
# sparse correlation with an offset kernel
# ---------------------------------------------------------------------------


@njit(cache=True)
def correlate_offsets_2d(cells, offsets, weights, shape0, shape1):
    """out[p] = sum_k w_k * E[p + o_k] where E is the indicator of ``cells``."""
    out = np.zeros((shape0, shape1), np.float64)
    for e in range(cells.shape[0]):
        ex, ey = cells[e, 0], cells[e, 1]
        for k in range(offsets.shape[0]):
            px = ex - offsets[k, 0]
            py = ey - offsets[k, 1]
            if 0 <= px < shape0 and 0 <= py < shape1:
                out[px, py] += weights[k]
    return out


@njit(cache=True)
def correlate_offsets_3d(cells, offsets, weights, shape0, shape1, shape2):
    out = np.zeros((shape0, shape1, shape2), np.float64)
    for e in range(cells.shape[0]):
        ex, ey, ez = cells[e, 0], cells[e, 1], cells[e, 2]
        for k in range(offsets.shape[0]):
            px = ex - offsets[k, 0]
            py = ey - offsets[k, 1]
            pz = ez - offsets[k, 2]
            if 0 <= px < shape0 and 0 <= py < shape1 and 0 <= pz < shape2:
                out[px, py, pz] += weights[k]
    return out


# ---------------------------------------------------------------------------
# rectangle tangency counts
# ---------------------------------------------------------------------------


@njit(cache=True)
def _arc_range(xb, yb, rb, ux, uy, ex0, ey0, ex1, ey1, cosh, cx, cy):
    """Min and max of |p - c| over an arc of the circle (xb, yb, rb).

    (ux, uy) is the unit direction of the arc centre, (ex*, ey*) the two arc
    endpoints and cosh the cosine of the half-angle. The extremes are the
    endpoints plus the points facing towards or away from c, when those lie
    on the arc.
    """
    v0 = math.hypot(ex0 - cx, ey0 - cy)
    v1 = math.hypot(ex1 - cx, ey1 - cy)
    lo = min(v0, v1)
    hi = max(v0, v1)
    wx = cx - xb
    wy = cy - yb
    D = math.hypot(wx, wy)
    if D > 0.0:
        cos_to = (wx * ux + wy * uy) / D
        if cos_to >= cosh:
            lo = min(lo, abs(D - rb))
        if -cos_to >= cosh:
            hi = max(hi, D + rb)
    return lo, hi


@njit(cache=True)
def rect_tangent_counts(xb, yb, rb, phi0, half, X, Y, R, slack):
    """For each rectangle, count circles whose distance to every arc point is <= slack."""
    nrect = xb.shape[0]
    out = np.zeros(nrect, np.int64)
    for q in range(nrect):
        ux = math.cos(phi0[q])
        uy = math.sin(phi0[q])
        px = xb[q] + rb[q] * ux
        py = yb[q] + rb[q] * uy
        ex0 = xb[q] + rb[q] * math.cos(phi0[q] - half[q])
        ey0 = yb[q] + rb[q] * math.sin(phi0[q] - half[q])
        ex1 = xb[q] + rb[q] * math.cos(phi0[q] + half[q])
        ey1 = yb[q] + rb[q] * math.sin(phi0[q] + half[q])
        cosh = math.cos(half[q])
        for c in range(X.shape[0]):
            # the arc centre must already be within slack of the circle
            if abs(math.hypot(px - X[c], py - Y[c]) - R[c]) > slack:
                continue
            lo, hi = _arc_range(xb[q], yb[q], rb[q], ux, uy, ex0, ey0, ex1, ey1, cosh, X[c], Y[c])
            if hi <= R[c] + slack and lo >= R[c] - slack:
                out[q] += 1
    return out


# ---------------------------------------------------------------------------
# greedy incomparable rectangles
# ---------------------------------------------------------------------------


@njit(cache=True)
def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@njit(cache=True)
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


@njit(cache=True)
def _span(bx, by, br, phi, half, sx, sy, sr):
    ref = math.atan2(by + br * math.sin(phi) - sy, bx + br * math.cos(phi) - sx)
    a0 = _wrap(math.atan2(by + br * math.sin(phi - half) - sy, bx + br * math.cos(phi - half) - sx) - ref)
    a1 = _wrap(math.atan2(by + br * math.sin(phi + half) - sy, bx + br * math.cos(phi + half) - sx) - ref)
    lo_rel = min(0.0, min(a0, a1))
    hi_rel = max(0.0, max(a0, a1))
    dlo, dhi = _dist_range(bx, by, br, phi, half, sx, sy)
    return ref + lo_rel, ref + hi_rel, max(dhi - sr, sr - dlo)


@njit(cache=True)
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


@njit(cache=True)
def greedy_incomparable(bx, by, br, phi, half, room, width_max, cell, x0, y0, ncx, ncy):
    """Keep rectangles in the given order unless comparable to one already kept.

    Kept rectangles are bucketed by the cell of their centre point; only the
    3x3 block of cells around a candidate is searched.
    """
    n = bx.shape[0]
    head = np.full(ncx * ncy, -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    keep = np.zeros(n, np.bool_)
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
