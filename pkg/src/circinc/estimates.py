"""Level sets of spherical and cone averages of indicator functions.

Averages are evaluated on the lattice h Z^d (origin aligned). The averaging
measure is discretised as the grid offsets inside the delta-neighbourhood of
the sphere, with equal weights summing to one, so the value at a grid point
is the fraction of those offsets that land in E. Everything is a direct sum
over E's cells; no transforms are involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyE
from .regions import RegionSpec


@dataclass(frozen=True)
class LevelSetResult:
    delta: float
    lam: float
    measure_E: float
    measure_F: float
    ratio: float
    grid_spacing: float
    E_kind: str = ""

    def row(self) -> list:
        return [self.delta, self.lam, self.E_kind, self.measure_E, self.measure_F, self.ratio]


def sphere_kernel(delta: float, spacing: float, dimension: int, radius: float = 1.0):
    """Offsets n (integer rows) with | |n h| - radius | <= delta, and equal unit-mass weights."""
    R = int(math.ceil((radius + delta) / spacing))
    axes = np.arange(-R, R + 1)
    grids = np.meshgrid(*([axes] * dimension), indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids]).astype(np.int64)
    keep = np.abs(np.linalg.norm(pts * spacing, axis=1) - radius) <= delta
    off = pts[keep]
    return off, np.full(off.shape[0], 1.0 / off.shape[0])


def region_cells(E: RegionSpec, spacing: float, dimension: int | None = None) -> np.ndarray:
    """Lattice points n with n h in E."""
    dim = E.dimension if dimension is None else dimension
    if E.dimension != dim:
        raise ValueError(f"region is {E.dimension}-dimensional, expected {dim}")
    lo, hi = E.bounding_box()
    axes = [np.arange(int(math.ceil(a / spacing - 1e-9)), int(math.floor(b / spacing + 1e-9)) + 1)
            for a, b in zip(lo, hi)]
    if any(a.size == 0 for a in axes):
        return np.empty((0, dim), np.int64)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids]).astype(np.int64)
    return pts[E.contains(pts * spacing)]


@dataclass(frozen=True)
class AverageField:
    """Average values on a box of the lattice: values[i] sits at (base + i) * spacing."""
    values: np.ndarray
    base: np.ndarray
    spacing: float
    delta: float
    measure_E: float
    cell_volume: float
    E_kind: str

    def measure_F(self, lam: float) -> float:
        return int(np.count_nonzero(self.values > lam)) * self.cell_volume

    def value_at(self, point) -> float:
        idx = np.round(np.asarray(point) / self.spacing).astype(np.int64) - self.base
        if np.any(idx < 0) or np.any(idx >= self.values.shape):
            return 0.0
        return float(self.values[tuple(idx)])


def _correlate(cells: np.ndarray, off: np.ndarray, reach: int, backend):
    """Fraction of the offsets o with x - o in E, for every x within reach of E.

    Hits are accumulated as whole numbers and divided once, so a point whose
    whole kernel lies in E gets exactly 1.
    """
    base = cells.min(axis=0) - reach
    shape = tuple(int(v) for v in cells.max(axis=0) + reach - base + 1)
    # out[e + o] += 1, i.e. the index e - base - (-o)
    hits = kernels.correlate_offsets(cells - base, -off, np.ones(off.shape[0]), shape, backend=backend)
    return hits / off.shape[0], base


def circular_average_field(E: RegionSpec, delta: float, spacing: float, dimension: int = 2,
                           backend: str | None = None) -> AverageField:
    if dimension not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    if not 0 < spacing <= delta / 2 * (1 + 1e-12):
        raise ValueError("spacing must lie in (0, delta/2]")
    cells = region_cells(E, spacing, dimension)
    if cells.shape[0] == 0:
        raise EmptyE("E has no cells on the grid")
    off, _ = sphere_kernel(delta, spacing, dimension)
    reach = int(np.abs(off).max())
    values, base = _correlate(cells, off, reach, backend)
    cell = spacing ** dimension
    return AverageField(values, base, spacing, delta, cells.shape[0] * cell, cell, E.kind.value)


def circular_average_levelset(E: RegionSpec, delta: float, lam: float, spacing: float,
                              dimension: int = 2, backend: str | None = None,
                              field: AverageField | None = None) -> LevelSetResult:
    """|F| for F = {average of 1_E over the delta-sphere > lam}, with ratio lam^(d+1) |F| / |E|^d."""
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    field = field or circular_average_field(E, delta, spacing, dimension, backend)
    mF = field.measure_F(lam)
    return LevelSetResult(delta, lam, field.measure_E, mF, lam ** (dimension + 1) * mF / field.measure_E ** dimension,
                          spacing, field.E_kind)


def time_slices(delta: float) -> np.ndarray:
    """The delta-grid of [1, 2]."""
    return 1.0 + delta * np.arange(int(math.floor(1.0 / delta + 1e-9)) + 1)


@dataclass(frozen=True)
class ConeField:
    """values[k] is the average field at time times[k]."""
    values: list
    times: np.ndarray
    base: np.ndarray
    spacing: float
    delta: float
    measure_E: float
    E_kind: str

    def measure_F(self, lam: float) -> float:
        cells = sum(int(np.count_nonzero(v > lam)) for v in self.values)
        return cells * self.spacing ** 2 * self.delta


def cone_average_field(E: RegionSpec, delta: float, spacing: float, backend: str | None = None) -> ConeField:
    if E.dimension != 2:
        raise ValueError("cone averages take planar sets")
    if not 0 < spacing <= delta / 2 * (1 + 1e-12):
        raise ValueError("spacing must lie in (0, delta/2]")
    cells = region_cells(E, spacing, 2)
    if cells.shape[0] == 0:
        raise EmptyE("E has no cells on the grid")
    times = time_slices(delta)
    reach = int(math.ceil((times[-1] + delta) / spacing))
    values = []
    base = None
    for t in times:
        off, _ = sphere_kernel(delta, spacing, 2, radius=float(t))
        v, b = _correlate(cells, off, reach, backend)
        values.append(v)
        base = b
    return ConeField(values, times, base, spacing, delta, cells.shape[0] * spacing ** 2, E.kind.value)


def cone_average_levelset(E: RegionSpec, delta: float, lam: float, spacing: float,
                          backend: str | None = None, field: ConeField | None = None) -> LevelSetResult:
    """|F| in space-time for the cone averages, with ratio lam |F|^(1/6) / |E|^(1/2)."""
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    field = field or cone_average_field(E, delta, spacing, backend)
    mF = field.measure_F(lam)
    return LevelSetResult(delta, lam, field.measure_E, mF, lam * mF ** (1 / 6) / field.measure_E ** 0.5,
                          spacing, field.E_kind)


def lambda_grid(delta: float) -> list[float]:
    """Dyadic levels 2^-k, k = 0 .. 2 log2(1/delta) + 4."""
    kmax = int(round(2 * math.log2(1 / delta))) + 4
    return [2.0 ** -k for k in range(kmax + 1)]


# the three extremal inputs -------------------------------------------------


def focusing_set(delta: float) -> RegionSpec:
    """The delta-annulus about the unit circle."""
    return RegionSpec.annulus((0.0, 0.0), 1.0, delta)


def knapp_set(delta: float) -> RegionSpec:
    """A delta x sqrt(delta) plate tangent to the unit circle at (1, 0)."""
    return RegionSpec.plate((1.0, 0.0), (0.0, 1.0), math.sqrt(delta), delta)


def scaling_set(delta: float) -> RegionSpec:
    """The delta-ball centred at (1, 0)."""
    return RegionSpec.ball((1.0, 0.0), delta)
