"""Exact binomial tails and Monte Carlo estimates for random simplex volumes."""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .parallel import run_blocks
from .regions import RegionSpec
from .rng import blocks, substream

# Median of vol/|S| for d uniform points in the unit ball of R^(d-1), i.e. the
# largest c with P[vol > c|S|] >= 1/2. Measured with ``measure_c0`` (2^22
# trials, seed 0) and frozen; for d = 2 the exact value is (2 - sqrt 2)/2.
C0 = {2: 0.29278, 3: 0.05643, 4: 0.008879}

PROBABILITY_FLOOR_BASE = 12.0


class HypothesisWarning(UserWarning):
    """Inputs outside the range the tail bound is stated for."""


def _rational(x: float) -> Fraction:
    # read floats as the decimals they print as, so 0.2 * 10 * 0.5 is exactly 1
    return Fraction(repr(float(x)))


def _k_max(N: int, p: float, alpha: float) -> int:
    """Largest k with k < alpha*N*p."""
    thr = _rational(alpha) * N * _rational(p)
    return math.ceil(thr) - 1


def binomial_tail(N: int, p: float, alpha: float) -> float:
    """P[S < alpha*N*p] for S ~ Binomial(N, p), summed term by term in log space."""
    if N < 1:
        raise ValueError("N must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if p > 0.5 or alpha > 0.5:
        warnings.warn(f"binomial_tail outside p <= 1/2, alpha <= 1/2 (p={p}, alpha={alpha})",
                      HypothesisWarning, stacklevel=2)
    kmax = min(_k_max(N, p, alpha), N)
    if kmax < 0:
        return 0.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 1.0 if kmax >= N else 0.0
    k = np.arange(kmax + 1)
    logs = np.array([math.lgamma(N + 1) - math.lgamma(i + 1) - math.lgamma(N - i + 1) for i in k.tolist()])
    logs += k * math.log(p) + (N - k) * math.log1p(-p)
    top = logs.max()
    return min(1.0, math.exp(top) * math.fsum(np.exp(logs - top).tolist()))


def binomial_tail_exact(N: int, p: float, alpha: float) -> Fraction:
    """Rational reference value of ``binomial_tail`` (p read as its decimal)."""
    pr = _rational(p)
    kmax = min(_k_max(N, p, alpha), N)
    return sum((math.comb(N, k) * pr ** k * (1 - pr) ** (N - k) for k in range(kmax + 1)), Fraction(0))


def tail_bound(N: int, p: float, alpha: float) -> float:
    """The closed-form upper bound N exp(-pN(1-alpha)^2 / (2(1-p)))."""
    return N * math.exp(-p * N * (1 - alpha) ** 2 / (2 * (1 - p)))


def simplex_volume(points) -> float:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] != pts.shape[1] + 1:
        raise ValueError("need d points in dimension d-1")
    if not 2 <= pts.shape[0] <= 6:
        raise ValueError("supported d is 2..6")
    return abs(float(np.linalg.det(pts[1:] - pts[0]))) / math.factorial(pts.shape[0] - 1)


def _volumes(gen: np.random.Generator, region: RegionSpec, d: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    pts = region.sample(gen, size * d).reshape(size, d, region.dimension)
    edges = pts[:, 1:] - pts[:, :1]
    return np.abs(np.linalg.det(edges)) / math.factorial(d - 1), edges


def perturbed_volume_lower_bound(edges: np.ndarray, r: float) -> np.ndarray:
    """Certified lower bound on the volume after moving every vertex by at most r.

    Each edge vector y_j - y_1 moves by at most 2r. The determinant is
    multilinear, so by Hadamard's inequality the change is at most
    prod(|e_j| + 2r) - prod |e_j|.
    """
    d = edges.shape[-1] + 1
    det = np.abs(np.linalg.det(edges))
    lengths = np.linalg.norm(edges, axis=-1)
    slack = np.prod(lengths + 2 * r, axis=-1) - np.prod(lengths, axis=-1)
    return np.maximum(det - slack, 0.0) / math.factorial(d - 1)


class SimplexMode(enum.Enum):
    PLAIN = "Plain"
    MIN_PERTURBED = "MinPerturbed"


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int
    seed: int
    params: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, successes: int, trials: int, seed: int, params: dict) -> "MCEstimate":
        est = successes / trials
        se = math.sqrt(max(est * (1 - est), 0.0) / trials)
        return cls(est, se, max(0.0, est - 1.96 * se), min(1.0, est + 1.96 * se), int(successes), trials, seed, params)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _plain_block(gen, size, region, d, threshold):
    vol, _ = _volumes(gen, region, d, size)
    return [int(np.count_nonzero(vol <= threshold))]


def _perturbed_block(gen, size, region, d, threshold, r):
    _, edges = _volumes(gen, region, d, size)
    return [int(np.count_nonzero(perturbed_volume_lower_bound(edges, r) > threshold))]


def simplex_probability(S: RegionSpec, d: int, eps: float, trials: int, seed: int,
                        mode: SimplexMode = SimplexMode.PLAIN, delta: float | None = None,
                        workers: int = 1) -> MCEstimate:
    """Monte Carlo probability of a small (Plain) or robustly large (MinPerturbed) simplex.

    Plain estimates P[vol <= eps |S|]. MinPerturbed estimates the probability
    that the certified lower bound on the volume under vertex moves of size
    delta/4 exceeds c0 3^(1-d) |S|; ``eps`` is ignored there. The result's
    params record the reference floor 6/12^d.
    """
    if d != S.dimension + 1:
        raise ValueError("d must equal the region dimension plus one")
    if trials < 10_000:
        raise ValueError("at least 10^4 trials are required")
    size = S.volume()
    params = {"region": S.kind.value, "d": d, "mode": mode.value, "volume": size}
    if mode is SimplexMode.PLAIN:
        params["eps"] = eps
        hits = run_blocks(_plain_block, trials, seed, (S, d, eps * size), workers)
    else:
        if delta is None or delta < 0:
            raise ValueError("MinPerturbed needs delta >= 0")
        if d not in C0:
            raise ValueError(f"no frozen c0 for d={d}")
        threshold = C0[d] * 3.0 ** (1 - d) * size
        params.update(delta=delta, threshold=threshold, floor=6.0 / PROBABILITY_FLOOR_BASE ** d)
        hits = run_blocks(_perturbed_block, trials, seed, (S, d, threshold, delta / 4), workers)
    return MCEstimate.from_counts(int(hits[0]), trials, seed, params)


def measure_c0(d: int, trials: int = 1 << 20, seed: int = 0) -> float:
    """Median of vol/|S| on the unit ball of R^(d-1)."""
    ball = RegionSpec.ball([0.0] * (d - 1), 1.0)
    vols = np.concatenate([_volumes(substream(seed, b), ball, d, n)[0] for b, n in blocks(trials)])
    return float(np.median(vols) / ball.volume())
