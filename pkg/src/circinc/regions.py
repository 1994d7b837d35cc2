"""Measurable regions used as inputs by the probability and level-set code."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np


class RegionKind(enum.Enum):
    BALL = "Ball"
    UNION_OF_BALLS = "UnionOfBalls"
    BOX = "Box"
    ANNULUS = "Annulus"
    PLATE = "Plate"


def ball_volume(dim: int, rho: float) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * rho ** dim


def _ball_sample(gen: np.random.Generator, n: int, dim: int) -> np.ndarray:
    g = gen.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * gen.random((n, 1)) ** (1.0 / dim)


@dataclass(frozen=True)
class RegionSpec:
    """A region of R^dim.

    Ball: ``centers[0]``, ``rho``. UnionOfBalls: ``centers``, ``rho``.
    Box: ``corner``, ``sides``. Annulus: ``centers[0]``, radius ``rho`` and
    half-width ``width``. Plate: a rectangle with centre ``centers[0]``, unit
    long axis ``axis``, side lengths ``sides`` = (long, short); plane only.
    """

    kind: RegionKind
    dimension: int
    centers: tuple[tuple[float, ...], ...] = ()
    rho: float = 0.0
    corner: tuple[float, ...] = ()
    sides: tuple[float, ...] = ()
    width: float = 0.0
    axis: tuple[float, ...] = ()
    separated: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.kind is RegionKind.UNION_OF_BALLS and self.separated:
            c = np.asarray(self.centers, float)
            if len(c) > 1:
                d = np.linalg.norm(c[:, None] - c[None], axis=-1)
                d[np.diag_indices(len(c))] = np.inf
                if d.min() <= 2 * self.rho:
                    raise ValueError("union-of-balls centres must be more than 2*rho apart")

    # constructors -------------------------------------------------------
    @classmethod
    def ball(cls, center, rho):
        return cls(RegionKind.BALL, len(center), (tuple(map(float, center)),), float(rho))

    @classmethod
    def union_of_balls(cls, centers, rho, separated=True):
        centers = tuple(tuple(map(float, c)) for c in centers)
        return cls(RegionKind.UNION_OF_BALLS, len(centers[0]), centers, float(rho), separated=separated)

    @classmethod
    def box(cls, corner, sides):
        return cls(RegionKind.BOX, len(corner), corner=tuple(map(float, corner)), sides=tuple(map(float, sides)))

    @classmethod
    def annulus(cls, center, radius, width):
        return cls(RegionKind.ANNULUS, len(center), (tuple(map(float, center)),), float(radius), width=float(width))

    @classmethod
    def plate(cls, center, axis, length, thickness):
        ax = np.asarray(axis, float)
        ax = ax / np.linalg.norm(ax)
        return cls(RegionKind.PLATE, 2, (tuple(map(float, center)),), sides=(float(length), float(thickness)),
                   axis=tuple(ax))

    # serialisation ------------------------------------------------------
    def to_json(self) -> str:
        d = {"kind": self.kind.value, "dimension": self.dimension, "centers": [list(c) for c in self.centers],
             "rho": self.rho, "corner": list(self.corner), "sides": list(self.sides), "width": self.width,
             "axis": list(self.axis), "separated": self.separated}
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RegionSpec":
        d = json.loads(text)
        return cls(RegionKind(d["kind"]), int(d["dimension"]), tuple(tuple(c) for c in d.get("centers", [])),
                   float(d.get("rho", 0.0)), tuple(d.get("corner", [])), tuple(d.get("sides", [])),
                   float(d.get("width", 0.0)), tuple(d.get("axis", [])), bool(d.get("separated", False)))

    # geometry -----------------------------------------------------------
    def volume(self) -> float:
        k = self.kind
        if k is RegionKind.BALL:
            return ball_volume(self.dimension, self.rho)
        if k is RegionKind.UNION_OF_BALLS:
            if not self.separated:
                raise ValueError("volume of overlapping balls is not tracked")
            return len(self.centers) * ball_volume(self.dimension, self.rho)
        if k is RegionKind.BOX:
            return float(np.prod(self.sides))
        if k is RegionKind.ANNULUS:
            lo = max(self.rho - self.width, 0.0)
            return ball_volume(self.dimension, self.rho + self.width) - ball_volume(self.dimension, lo)
        return self.sides[0] * self.sides[1]

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        k = self.kind
        if k in (RegionKind.BALL, RegionKind.UNION_OF_BALLS):
            c = np.asarray(self.centers, float)
            d = np.linalg.norm(pts[:, None, :] - c[None], axis=-1)
            return (d <= self.rho).any(axis=1)
        if k is RegionKind.BOX:
            lo = np.asarray(self.corner)
            return np.all((pts >= lo) & (pts <= lo + np.asarray(self.sides)), axis=1)
        if k is RegionKind.ANNULUS:
            d = np.linalg.norm(pts - np.asarray(self.centers[0]), axis=1)
            return np.abs(d - self.rho) <= self.width
        rel = pts - np.asarray(self.centers[0])
        ax = np.asarray(self.axis)
        along = rel @ ax
        across = rel @ np.array([-ax[1], ax[0]])
        return (np.abs(along) <= self.sides[0] / 2) & (np.abs(across) <= self.sides[1] / 2)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.kind
        if k in (RegionKind.BALL, RegionKind.UNION_OF_BALLS):
            c = np.asarray(self.centers, float)
            return c.min(axis=0) - self.rho, c.max(axis=0) + self.rho
        if k is RegionKind.BOX:
            lo = np.asarray(self.corner, float)
            return lo, lo + np.asarray(self.sides)
        if k is RegionKind.ANNULUS:
            c = np.asarray(self.centers[0], float)
            return c - self.rho - self.width, c + self.rho + self.width
        c = np.asarray(self.centers[0], float)
        half = 0.5 * math.hypot(*self.sides)
        return c - half, c + half

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        """Uniform points; balls exactly, other kinds by rejection from the bounding box."""
        k = self.kind
        if k is RegionKind.BALL:
            return np.asarray(self.centers[0]) + self.rho * _ball_sample(gen, n, self.dimension)
        if k is RegionKind.UNION_OF_BALLS:
            if not self.separated:
                raise ValueError("uniform sampling needs disjoint balls")
            which = gen.integers(0, len(self.centers), n)
            return np.asarray(self.centers)[which] + self.rho * _ball_sample(gen, n, self.dimension)
        if k is RegionKind.BOX:
            return np.asarray(self.corner) + gen.random((n, self.dimension)) * np.asarray(self.sides)
        lo, hi = self.bounding_box()
        out = np.empty((0, self.dimension))
        while out.shape[0] < n:
            cand = lo + gen.random((2 * n, self.dimension)) * (hi - lo)
            out = np.vstack([out, cand[self.contains(cand)]])
        return out[:n]
