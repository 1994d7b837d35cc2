"""Helpers shared by both kernel backends (no compiler involved)."""
from __future__ import annotations

import math

import numpy as np


def net_ball(step, delta):
    """Grid offsets (di, dj, dk) whose d-length is <= delta."""
    reach = int(math.floor(delta / step + 1e-9)) + 1
    out = []
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            for dk in range(-reach, reach + 1):
                if math.hypot(di * step, dj * step) + abs(dk) * step <= delta:
                    out.append((di, dj, dk))
    return np.array(out, dtype=np.int64).reshape(-1, 3)
