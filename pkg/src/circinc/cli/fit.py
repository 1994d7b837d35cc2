"""Log-log least-squares exponent fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]  # (ln x, ln y)

    def predict(self, x: float) -> float:
        return math.exp(self.intercept) * x ** self.slope

    def residuals(self) -> np.ndarray:
        u, v = np.array(self.points).T
        return v - (self.intercept + self.slope * u)

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "points": [list(p) for p in self.points]}


def fit_exponent(points) -> FitResult:
    """Ordinary least squares of ln y on ln x.

    r_squared is 1 when y is constant, since a flat line then fits exactly.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(not (x > 0 and y > 0) or math.isinf(x) or math.isinf(y) for x, y in pts):
        raise ValueError("points must be finite and positive")
    u = np.log([x for x, _ in pts])
    v = np.log([y for _, y in pts])
    du = u - u.mean()
    sxx = float(du @ du)
    if sxx == 0.0 or np.ptp(u) == 0.0:
        raise DegenerateInput("all x values are equal")
    slope = float(du @ (v - v.mean())) / sxx
    intercept = float(v.mean() - slope * u.mean())
    res = v - (intercept + slope * u)
    ss_tot = float(((v - v.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(res @ res) / ss_tot
    return FitResult(slope, intercept, r2, tuple(zip(u.tolist(), v.tolist())))
