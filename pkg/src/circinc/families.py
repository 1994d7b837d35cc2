"""Generators and validators for circle families."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels, rng
from .errors import NoValidSplit
from .geom_core import Circle


class FamilyKind(enum.Enum):
    LATTICE = "Lattice"
    DELTA_NET = "DeltaNet"
    RADII_SEPARATED_NET = "RadiiSeparatedNet"
    KNAPP = "Knapp"
    THINNED = "Thinned"
    CUSTOM = "Custom"


class NetMode(enum.Enum):
    FULL_SEPARATION = "FullSeparation"
    RADII_SEPARATION = "RadiiSeparation"


@dataclass(frozen=True)
class Box:
    """Axis-aligned region of (center x, center y, radius) space."""

    x0: float
    x1: float
    y0: float
    y1: float
    r0: float
    r1: float

    def __post_init__(self):
        if not (self.x0 <= self.x1 and self.y0 <= self.y1 and 0 < self.r0 <= self.r1):
            raise ValueError(f"invalid box {self}")

    @property
    def diameter(self) -> float:
        """Largest d-distance between two points of the box."""
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0) + (self.r1 - self.r0)

    def as_list(self) -> list[float]:
        return [self.x0, self.x1, self.y0, self.y1, self.r0, self.r1]

    def contains(self, x, y, r):
        return ((x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)
                & (r >= self.r0) & (r <= self.r1))


UNIT_BOX = Box(0.0, 1.0, 0.0, 1.0, 0.5, 1.0)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CircleFamily:
    xs: np.ndarray
    ys: np.ndarray
    rs: np.ndarray
    delta: float
    kind: FamilyKind
    box: Box | None = None
    seed: int | None = None
    lattice: np.ndarray | None = None
    lattice_n: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "xs", _frozen(self.xs, np.float64))
        object.__setattr__(self, "ys", _frozen(self.ys, np.float64))
        object.__setattr__(self, "rs", _frozen(self.rs, np.float64))
        if not (self.xs.shape == self.ys.shape == self.rs.shape) or self.xs.ndim != 1:
            raise ValueError("coordinate arrays must be 1-D and equally long")
        if np.any(self.rs <= 0):
            raise ValueError("radii must be positive")
        if self.lattice is not None:
            object.__setattr__(self, "lattice", _frozen(self.lattice, np.int64).reshape(-1, 3))

    def __len__(self) -> int:
        return int(self.xs.shape[0])

    def circle(self, i: int) -> Circle:
        coords = tuple(self.lattice[i]) if self.lattice is not None else None
        return Circle((self.xs[i], self.ys[i]), self.rs[i], coords)

    @property
    def circles(self) -> list[Circle]:
        return [self.circle(i) for i in range(len(self))]

    def points(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys, self.rs])

    def subset(self, idx, kind: FamilyKind | None = None, **params) -> "CircleFamily":
        idx = np.asarray(idx)
        lat = self.lattice[idx] if self.lattice is not None else None
        return CircleFamily(self.xs[idx], self.ys[idx], self.rs[idx], self.delta,
                            kind or self.kind, self.box, params.pop("seed", self.seed),
                            lat, self.lattice_n, {**self.params, **params})

    @classmethod
    def from_circles(cls, circles: Iterable[Circle], delta: float,
                     kind: FamilyKind = FamilyKind.CUSTOM, **kw) -> "CircleFamily":
        circles = list(circles)
        xs = [c.center[0] for c in circles]
        ys = [c.center[1] for c in circles]
        rs = [c.radius for c in circles]
        return cls(np.array(xs, float), np.array(ys, float), np.array(rs, float), delta, kind, **kw)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def lattice_family(N: int) -> CircleFamily:
    """Circles C(j/N, k/N, l/N) with 1 <= j, k <= N and ceil(N/2) <= l <= N."""
    if N < 2:
        raise ValueError("N must be at least 2")
    lo = (N + 1) // 2
    j, k, l = np.meshgrid(np.arange(1, N + 1), np.arange(1, N + 1), np.arange(lo, N + 1), indexing="ij")
    lat = np.column_stack([j.ravel(), k.ravel(), l.ravel()]).astype(np.int64)
    return CircleFamily(lat[:, 0] / N, lat[:, 1] / N, lat[:, 2] / N, 1.0 / N, FamilyKind.LATTICE,
                        Box(1 / N, 1.0, 1 / N, 1.0, lo / N, 1.0), None, lat, N, {"N": N})


def _candidate_grid(box: Box, step: float) -> tuple[int, int, int]:
    return (int(math.floor((box.x1 - box.x0) / step + 1e-9)) + 1,
            int(math.floor((box.y1 - box.y0) / step + 1e-9)) + 1,
            int(math.floor((box.r1 - box.r0) / step + 1e-9)) + 1)


def delta_net_family(delta: float, box: Box = UNIT_BOX, mode: NetMode = NetMode.FULL_SEPARATION,
                     seed: int = 0) -> CircleFamily:
    """Greedy maximal net over a shuffled candidate grid of spacing delta/2."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    step = delta / 2
    gen = np.random.default_rng(seed)
    if mode is NetMode.FULL_SEPARATION:
        nx, ny, nr = _candidate_grid(box, step)
        perm = gen.permutation(nx * ny * nr).astype(np.int64)
        ids = kernels.greedy_net(perm, box.x0, box.y0, box.r0, step, nx, ny, nr, delta)
        ids = np.sort(ids)
        xs = box.x0 + (ids // (ny * nr)) * step
        ys = box.y0 + ((ids // nr) % ny) * step
        rs = box.r0 + (ids % nr) * step
        kind = FamilyKind.DELTA_NET
    else:
        nr = _candidate_grid(box, step)[2]
        blocked = np.zeros(nr, bool)
        chosen = []
        reach = int(math.floor(delta / step + 1e-9))
        for i in gen.permutation(nr):
            if blocked[i]:
                continue
            chosen.append(i)
            # radii within delta of an accepted one are excluded; exactly delta is allowed
            blocked[max(0, i - reach + 1):i + reach] = True
        rs = box.r0 + np.sort(np.asarray(chosen, np.int64)) * step
        xs = gen.uniform(box.x0, box.x1, rs.shape[0])
        ys = gen.uniform(box.y0, box.y1, rs.shape[0])
        kind = FamilyKind.RADII_SEPARATED_NET
    return CircleFamily(xs, ys, rs, delta, kind, box, seed, params={"mode": mode.value, "step": step})


def knapp_family(delta: float) -> CircleFamily:
    """Circles through the origin, r on a delta-grid of [1, 2), normals spread over sqrt(delta)."""
    if not 0 < delta < 1 / 16:
        raise ValueError("need 0 < delta < 1/16")
    n_r = int(math.floor(1 / delta + 1e-9))
    n_t = int(math.floor(math.sqrt(delta) / delta + 1e-9)) + 1
    r = 1.0 + delta * np.arange(n_r)
    th = delta * np.arange(n_t)
    R, T = np.meshgrid(r, th, indexing="ij")
    R = R.ravel()
    T = T.ravel()
    return CircleFamily(R * np.cos(T), R * np.sin(T), R, delta, FamilyKind.KNAPP,
                        params={"n_r": n_r, "n_theta": n_t})


def bernoulli_thin(family: CircleFamily, p: float, seed: int) -> CircleFamily:
    """Keep circle i iff U(seed, i) < p, with U the counter-based uniform."""
    if not 0 <= p <= 1:
        raise ValueError("p must be a probability")
    keep = np.flatnonzero(rng.uniforms(seed, len(family)) < p)
    return family.subset(keep, FamilyKind.THINNED, seed=seed, p=p, parent_size=len(family))


def thin_indicator_reference(n: int, p: float, seed: int) -> list[bool]:
    """Scalar re-derivation of the thinning decisions, for cross-checking."""
    return [rng.uniform_scalar(seed, i) < p for i in range(n)]


# ---------------------------------------------------------------------------
# separation
# ---------------------------------------------------------------------------


def min_pairwise_distance(family: CircleFamily) -> float:
    n = len(family)
    if n < 2:
        return math.inf
    probe = family.delta
    while True:
        i, j = kernels.scan(family.xs, family.ys, family.rs, d_hi=probe, collect=True)
        if i.size:
            f = family
            d = np.hypot(f.xs[i] - f.xs[j], f.ys[i] - f.ys[j]) + np.abs(f.rs[i] - f.rs[j])
            return float(d.min())
        probe *= 2


def validate_separation(family: CircleFamily, delta: float | None = None,
                        mode: NetMode | None = None) -> bool:
    """Pairwise d > delta (full mode) or |r - r'| >= delta (radii mode)."""
    delta = family.delta if delta is None else delta
    if mode is None:
        mode = NetMode.RADII_SEPARATION if family.kind is FamilyKind.RADII_SEPARATED_NET \
            else NetMode.FULL_SEPARATION
    if len(family) < 2:
        return True
    if mode is NetMode.RADII_SEPARATION:
        gaps = np.diff(np.sort(family.rs))
        return bool(np.all(gaps >= delta - 1e-12))
    return kernels.scan(family.xs, family.ys, family.rs, d_hi=delta) == 0


def net_is_maximal(family: CircleFamily) -> bool:
    """Every candidate-grid point lies within d <= delta of a member."""
    box = family.box
    step = family.params["step"]
    nx, ny, nr = _candidate_grid(box, step)
    g = np.stack(np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nr), indexing="ij"), -1).reshape(-1, 3)
    cx = box.x0 + g[:, 0] * step
    cy = box.y0 + g[:, 1] * step
    cr = box.r0 + g[:, 2] * step
    n = len(family)
    xs = np.concatenate([family.xs, cx])
    ys = np.concatenate([family.ys, cy])
    rs = np.concatenate([family.rs, cr])
    grp = np.concatenate([np.zeros(n, np.int64), np.ones(cx.size, np.int64)])
    i, j = kernels.scan(xs, ys, rs, d_hi=family.delta * (1 + 1e-12), groups=grp, collect=True)
    covered = np.zeros(cx.size, bool)
    covered[np.where(i >= n, i, j) - n] = True
    return bool(covered.all())


# ---------------------------------------------------------------------------
# bipartite split
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BipartitePair:
    white: CircleFamily
    black: CircleFamily
    t: float
    cross_only: bool = False  # only the cross-distance half of the invariant is claimed

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.white), len(self.black)


def _d_matrix(a: CircleFamily, b: CircleFamily) -> np.ndarray:
    return (np.hypot(a.xs[:, None] - b.xs[None, :], a.ys[:, None] - b.ys[None, :])
            + np.abs(a.rs[:, None] - b.rs[None, :]))


def _diameter(f: CircleFamily) -> float:
    if len(f) < 2:
        return 0.0
    return float(_d_matrix(f, f).max())


def validate_bipartite(pair: BipartitePair, t: float | None = None, strict: bool | None = None) -> bool:
    """t <= d(w, b) <= 100 t across; internal d-diameters at most t (unless
    the pair only claims the cross condition)."""
    t = pair.t if t is None else t
    strict = not pair.cross_only if strict is None else strict
    w, b = pair.white, pair.black
    if len(w) == 0 or len(b) == 0:
        return False
    lo = hi = None
    for s in range(0, len(w), 2048):
        d = _d_matrix(w.subset(np.arange(s, min(len(w), s + 2048))), b)
        lo = d.min() if lo is None else min(lo, d.min())
        hi = d.max() if hi is None else max(hi, d.max())
    if lo < t - 1e-12 or hi > 100 * t + 1e-12:
        return False
    if strict and (_diameter(w) > t + 1e-12 or _diameter(b) > t + 1e-12):
        return False
    return True


def bipartite_split(family: CircleFamily, t: float, top: int = 64, max_centres: int = 4096) -> BipartitePair:
    """Two members' d-balls of radius t/20 at mutual distance in [t, 99t],
    chosen to maximise |W||B|. If the requested t fails the cross condition by
    a hair (the balls are not points), the pair carries t' = min cross d."""
    n = len(family)
    if n == 0:
        raise NoValidSplit("empty family")
    rad = t / 20
    stride = max(1, n // max_centres)
    centres = np.arange(0, n, stride)
    xs, ys, rs = family.xs, family.ys, family.rs
    # ball counts around candidate centres
    grp = np.concatenate([np.zeros(n, np.int64), np.ones(centres.size, np.int64)])
    i, j = kernels.scan(np.concatenate([xs, xs[centres]]), np.concatenate([ys, ys[centres]]),
                        np.concatenate([rs, rs[centres]]), d_hi=rad, groups=grp, collect=True)
    member = np.where(i < n, i, j)
    centre = np.where(i < n, j, i) - n
    counts = np.bincount(centre, minlength=centres.size)
    best = np.argsort(-counts, kind="stable")[:top]
    cand = []
    for a_pos in range(len(best)):
        for b_pos in range(a_pos + 1, len(best)):
            a, b = best[a_pos], best[b_pos]
            ca, cb = centres[a], centres[b]
            D = math.hypot(xs[ca] - xs[cb], ys[ca] - ys[cb]) + abs(rs[ca] - rs[cb])
            if t <= D <= 99 * t:
                cand.append((-int(counts[a]) * int(counts[b]), int(a), int(b)))
    cand.sort()
    for _, a, b in cand:
        wa = np.sort(member[centre == a])
        wb = np.sort(member[centre == b])
        if np.intersect1d(wa, wb).size:
            continue
        W = family.subset(wa)
        B = family.subset(wb)
        pair = BipartitePair(W, B, t)
        if validate_bipartite(pair):
            return pair
        t2 = float(_d_matrix(W, B).min())
        if t2 > 0:
            pair = BipartitePair(W, B, t2)
            if validate_bipartite(pair):
                return pair
    raise NoValidSplit(f"no ball pair at scale t={t} satisfies the bipartite invariant")


def band_split(family: CircleFamily, white_radii: tuple[float, float],
               black_radii: tuple[float, float], t: float) -> BipartitePair:
    """Split by radius bands. Pieces sit at d-distance >= t from one another,
    but each piece spans the whole centre box, so only the cross condition holds."""
    rs = family.rs
    W = family.subset(np.flatnonzero((rs >= white_radii[0]) & (rs <= white_radii[1])))
    B = family.subset(np.flatnonzero((rs >= black_radii[0]) & (rs <= black_radii[1])))
    return BipartitePair(W, B, t, cross_only=True)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def write_jsonl(family: CircleFamily, path: str | Path) -> None:
    header = {"kind": family.kind.value, "delta": family.delta, "seed": family.seed,
              "box": family.box.as_list() if family.box else None, "lattice_n": family.lattice_n}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for i in range(len(family)):
            row = {"cx": float(family.xs[i]), "cy": float(family.ys[i]), "r": float(family.rs[i])}
            if family.lattice is not None:
                j, k, l = (int(v) for v in family.lattice[i])
                row.update(j=j, k=k, l=l)
            fh.write(json.dumps(row) + "\n")


def read_jsonl(path: str | Path) -> CircleFamily:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        rows = [json.loads(line) for line in fh if line.strip()]
    lat = None
    if rows and "j" in rows[0]:
        lat = np.array([[r["j"], r["k"], r["l"]] for r in rows], np.int64)
    box = Box(*header["box"]) if header.get("box") else None
    return CircleFamily(np.array([r["cx"] for r in rows], float), np.array([r["cy"] for r in rows], float),
                        np.array([r["r"] for r in rows], float), header["delta"], FamilyKind(header["kind"]),
                        box, header.get("seed"), lat, header.get("lattice_n"))


def concat(families: Sequence[CircleFamily], kind: FamilyKind = FamilyKind.CUSTOM) -> CircleFamily:
    return CircleFamily(np.concatenate([f.xs for f in families]), np.concatenate([f.ys for f in families]),
                        np.concatenate([f.rs for f in families]), min(f.delta for f in families), kind)
