"""Counter-based randomness.

Every random draw in the package is a pure function of (seed, counter), so a
result never depends on how work is split between processes.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

BLOCK = 1 << 16  # Monte Carlo trials per substream


def splitmix64_scalar(z: int) -> int:
    """Reference implementation on Python ints."""
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int, start: int = 0) -> np.ndarray:
    """U[0,1) values for counters start..start+n-1 under ``seed``."""
    key = splitmix64_scalar(seed & MASK64)
    idx = np.arange(start, start + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = splitmix64(idx ^ np.uint64(key))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def uniform_scalar(seed: int, index: int) -> float:
    key = splitmix64_scalar(seed & MASK64)
    return (splitmix64_scalar((index ^ key) & MASK64) >> 11) * (1.0 / (1 << 53))


def substream(seed: int, block: int) -> np.random.Generator:
    """Generator for Monte Carlo block ``block``; independent of worker layout."""
    return np.random.Generator(np.random.Philox(key=[seed & MASK64, block & MASK64]))


def blocks(trials: int) -> list[tuple[int, int]]:
    """Split ``trials`` into (block id, size) chunks of at most BLOCK."""
    out = []
    b = 0
    while trials > 0:
        size = min(BLOCK, trials)
        out.append((b, size))
        trials -= size
        b += 1
    return out
