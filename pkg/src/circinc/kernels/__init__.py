"""Kernel dispatch.

The compiled (numba) kernels are used when numba imports cleanly. Setting
``CIRCINC_KERNELS=numpy`` forces the pure-numpy fallback; ``CIRCINC_KERNELS=numba``
makes a missing numba an error instead of a silent downgrade.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _numpy

ENV_FLAG = "CIRCINC_KERNELS"


def _load_numba() -> ModuleType | None:
    try:
        from . import _numba
    except ImportError:
        return None
    return _numba


def _select() -> tuple[str, ModuleType]:
    want = os.environ.get(ENV_FLAG, "").strip().lower()
    if want not in ("", "numba", "numpy"):
        raise RuntimeError(f"{ENV_FLAG} must be 'numba' or 'numpy', got {want!r}")
    if want == "numpy":
        return "numpy", _numpy
    mod = _load_numba()
    if mod is None:
        if want == "numba":
            raise RuntimeError(f"{ENV_FLAG}=numba but numba is not importable")
        return "numpy", _numpy
    return "numba", mod


BACKEND, _impl = _select()


def backend_module(name: str | None = None) -> ModuleType:
    """Return a specific kernel module (for benchmarks and parity tests)."""
    if name is None:
        return _impl
    if name == "numpy":
        return _numpy
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise RuntimeError("numba is not importable")
        return mod
    raise ValueError(f"unknown backend {name!r}")


# ---------------------------------------------------------------------------
# cell index for the pair scan
# ---------------------------------------------------------------------------

MAX_CELLS = 1 << 22


@dataclass(frozen=True)
class CellIndex:
    """Points bucketed into a regular (x, y, r) cell grid of side ``h``."""

    origin: np.ndarray
    h: float
    dims: np.ndarray
    order: np.ndarray
    cell_start: np.ndarray

    @classmethod
    def build(cls, x, y, r, h: float) -> "CellIndex":
        pts = np.column_stack([x, y, r])
        lo = pts.min(axis=0) if len(pts) else np.zeros(3)
        hi = pts.max(axis=0) if len(pts) else np.zeros(3)
        ext = hi - lo
        h = max(h, float(np.max(ext)) / (MAX_CELLS ** (1 / 3)) if len(pts) else h, 1e-15)
        dims = np.maximum(1, np.floor(ext / h).astype(np.int64) + 1)
        idx = np.minimum(np.floor((pts - lo) / h).astype(np.int64), dims - 1)
        lin = (idx[:, 0] * dims[1] + idx[:, 1]) * dims[2] + idx[:, 2]
        order = np.argsort(lin, kind="stable").astype(np.int64)
        ncell = int(np.prod(dims))
        cell_start = np.zeros(ncell + 1, np.int64)
        np.add.at(cell_start, lin + 1, 1)
        np.cumsum(cell_start, out=cell_start)
        return cls(lo, float(h), dims, order, cell_start)


def _norm_range(lo, hi):
    """Range of |v| for v in the 2-D box [lo0, hi0] x [lo1, hi1]."""
    near = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    far = np.maximum(np.abs(lo), np.abs(hi))
    return np.hypot(near[..., 0], near[..., 1]), np.hypot(far[..., 0], far[..., 1])


def pair_offsets(index: CellIndex, tan_max: float, d_lo: float, d_hi: float) -> np.ndarray:
    """Cell offsets (half of them, lexicographically >= 0) that can hold a pair
    with |rho - |dr|| <= tan_max and d in [d_lo, d_hi], where rho is the centre
    distance and d = rho + |dr|."""
    h = index.h
    span = d_hi / h + 1.0
    reach = index.dims - 1 if not span < 1e12 else np.minimum(index.dims - 1, int(math.ceil(span)))
    axes = [np.arange(-k, k + 1) for k in reach]
    off = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    lex = (off[:, 0] > 0) | ((off[:, 0] == 0) & ((off[:, 1] > 0) | ((off[:, 1] == 0) & (off[:, 2] >= 0))))
    off = off[lex]
    lo = (off - 1) * h
    hi = (off + 1) * h
    rho_lo, rho_hi = _norm_range(lo[:, :2], hi[:, :2])
    dr_lo = np.where((lo[:, 2] <= 0) & (hi[:, 2] >= 0), 0.0, np.minimum(np.abs(lo[:, 2]), np.abs(hi[:, 2])))
    dr_hi = np.maximum(np.abs(lo[:, 2]), np.abs(hi[:, 2]))
    tan_lb = np.maximum(0.0, np.maximum(rho_lo - dr_hi, dr_lo - rho_hi))
    keep = (tan_lb <= tan_max * (1 + 1e-12) + 1e-15) & (rho_lo + dr_lo <= d_hi * (1 + 1e-12) + 1e-15) \
        & (rho_hi + dr_hi >= d_lo * (1 - 1e-12) - 1e-15)
    return np.ascontiguousarray(off[keep])


def choose_cell_size(n: int, extent: np.ndarray, d_hi: float) -> float:
    """Cell side aiming at a handful of points per cell, never larger than needed."""
    vol = float(np.prod(np.maximum(extent, 1e-9)))
    occ_h = (vol * 4.0 / max(n, 1)) ** (1 / 3)
    return max(min(d_hi, occ_h), 1e-12) if math.isfinite(d_hi) else occ_h


def scan(x, y, r, *, tan_max=math.inf, d_lo=0.0, d_hi=math.inf, gap_max=math.inf,
         groups=None, collect=False, backend: str | None = None):
    """Count (or list) unordered pairs i < j with d in [d_lo, d_hi],
    |rho - |dr|| <= tan_max and rho - r_i - r_j <= gap_max. With ``groups``
    only pairs from different groups are considered."""
    mod = backend_module(backend)
    x = np.ascontiguousarray(x, np.float64)
    y = np.ascontiguousarray(y, np.float64)
    r = np.ascontiguousarray(r, np.float64)
    n = x.shape[0]
    if n < 2:
        if collect:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        return 0
    ext = np.array([np.ptp(x), np.ptp(y), np.ptp(r)])
    index = CellIndex.build(x, y, r, choose_cell_size(n, ext, d_hi))
    offsets = pair_offsets(index, tan_max, d_lo, d_hi)
    cross = groups is not None
    grp = np.ascontiguousarray(groups if cross else np.zeros(n), np.int64)
    fn = mod.scan_pairs if collect else mod.scan_count
    return fn(x, y, r, grp, index.order, index.cell_start, index.dims, offsets,
              float(tan_max), float(d_lo), float(d_hi), float(gap_max), cross)


def arc_multiplicity(*args, backend: str | None = None):
    return backend_module(backend).arc_multiplicity(*args)


def annulus_raster(*args, backend: str | None = None):
    return backend_module(backend).annulus_raster(*args)


def greedy_net(*args, backend: str | None = None):
    return backend_module(backend).greedy_net(*args)


def correlate_offsets(cells, offsets, weights, shape, backend: str | None = None):
    mod = backend_module(backend)
    cells = np.ascontiguousarray(cells, np.int64)
    offsets = np.ascontiguousarray(offsets, np.int64)
    weights = np.ascontiguousarray(weights, np.float64)
    if len(shape) == 2:
        return mod.correlate_offsets_2d(cells, offsets, weights, *shape)
    return mod.correlate_offsets_3d(cells, offsets, weights, *shape)


def rect_tangent_counts(*args, backend: str | None = None):
    return backend_module(backend).rect_tangent_counts(*args)


__all__ = [
    "BACKEND", "ENV_FLAG", "CellIndex", "annulus_raster", "arc_multiplicity",
    "backend_module", "correlate_offsets", "greedy_net", "pair_offsets",
    "greedy_incomparable", "rect_tangent_counts", "scan",
]


def greedy_incomparable(*args, backend: str | None = None):
    return backend_module(backend).greedy_incomparable(*args)
