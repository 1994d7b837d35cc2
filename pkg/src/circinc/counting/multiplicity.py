"""Multiplicity of a family of annuli: on a grid, and along one annulus."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..families import CircleFamily
from ..geom_core import Circle
from .pairs import eps_t_neighborhood


@dataclass(frozen=True)
class MultiplicityGrid:
    origin: tuple[float, float]
    spacing: float
    counts: np.ndarray
    delta: float

    def point(self, i: int, j: int) -> tuple[float, float]:
        return self.origin[0] + i * self.spacing, self.origin[1] + j * self.spacing

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        return round((x - self.origin[0]) / self.spacing), round((y - self.origin[1]) / self.spacing)


def multiplicity_grid(family: CircleFamily, delta: float, spacing: float, window,
                      backend: str | None = None) -> MultiplicityGrid:
    """Annulus counts at the points origin + (i, j) * spacing covering ``window``.

    ``window`` is (x0, x1, y0, y1); both ends are sample points when the
    width is a multiple of the spacing.
    """
    if not 0 < spacing <= delta / 2 * (1 + 1e-12):
        raise ValueError("spacing must lie in (0, delta/2]")
    x0, x1, y0, y1 = (float(v) for v in window)
    nx = int(math.floor((x1 - x0) / spacing + 1e-9)) + 1
    ny = int(math.floor((y1 - y0) / spacing + 1e-9)) + 1
    counts = kernels.annulus_raster(np.ascontiguousarray(family.xs), np.ascontiguousarray(family.ys),
                                    np.ascontiguousarray(family.rs), float(delta), x0, y0, float(spacing),
                                    nx, ny, backend=backend)
    return MultiplicityGrid((x0, y0), float(spacing), counts, float(delta))


def annulus_samples(c: Circle, delta: float, spacing: float | None = None) -> tuple[np.ndarray, int, np.ndarray]:
    """Radial offsets, angular count and area weights of a midpoint sample of C^delta(c)."""
    spacing = delta / 4 if spacing is None else spacing
    n_rad = max(1, int(math.ceil(2 * delta / spacing)))
    s = -delta + (np.arange(n_rad) + 0.5) * (2 * delta / n_rad)
    s = s[c.radius + s > 0]
    m = max(8, int(math.ceil(2 * math.pi * (c.radius + delta) / spacing)))
    w = c.radius + s
    return s, m, w / (w.sum() * m)


def arc_multiplicity(c: Circle, family: CircleFamily, delta: float, spacing: float | None = None,
                     backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Multiplicity at the sample points of C^delta(c); returns (counts, weights),
    both of shape (radial samples, angles), the weights summing to one."""
    s, m, w = annulus_samples(c, delta, spacing)
    counts = kernels.arc_multiplicity(float(c.center[0]), float(c.center[1]), float(c.radius),
                                      np.ascontiguousarray(s), m,
                                      np.ascontiguousarray(family.xs), np.ascontiguousarray(family.ys),
                                      np.ascontiguousarray(family.rs), float(delta), backend=backend)
    return counts, np.repeat(w[:, None], m, axis=1)


def high_multiplicity_fraction(c: Circle, family: CircleFamily, delta: float, threshold: float,
                               restrict: tuple[float, float] | None = None,
                               backend: str | None = None) -> float:
    """Area fraction of C^delta(c) where the multiplicity exceeds ``threshold``.

    With ``restrict = (eps, t)`` only the members eps-tangent to c at scale t
    contribute to the multiplicity.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if restrict is not None:
        family = family.subset(eps_t_neighborhood(family, c, restrict[0], restrict[1], delta))
    if len(family) == 0:
        return 0.0
    counts, weights = arc_multiplicity(c, family, delta, backend=backend)
    return float(min(1.0, weights[counts > threshold].sum()))
