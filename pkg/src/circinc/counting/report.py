"""Incidence summaries: pair counts by dyadic (eps, t) bucket and rectangle types."""
from __future__ import annotations

import csv
import io
import json
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import kernels
from ..families import CircleFamily
from .pairs import bucket_of, pair_metric_arrays
from .rectangles import RectangleTypeRecord


@dataclass
class IncidenceReport:
    family: dict
    delta: float
    eps_max: float
    buckets: dict[tuple[float, float], int]
    rectangle_types: dict[tuple[int, int], int] = field(default_factory=dict)
    rectangle_t: float | None = None
    seconds: float = 0.0
    pairs_per_second: float = 0.0

    @property
    def total_pairs(self) -> int:
        return sum(self.buckets.values())

    def to_json(self) -> str:
        d = asdict(self)
        d["buckets"] = [{"eps": e, "t": t, "pairs": n} for (e, t), n in sorted(self.buckets.items())]
        d["rectangle_types"] = [{"mu": m, "nu": v, "count": n} for (m, v), n in sorted(self.rectangle_types.items())]
        d["total_pairs"] = self.total_pairs
        return json.dumps(d, sort_keys=True)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["eps", "t", "pairs", "rectangles", "mu", "nu"])
        for (e, t), n in sorted(self.buckets.items()):
            w.writerow([repr(e), repr(t), n, "", "", ""])
        for (m, v), n in sorted(self.rectangle_types.items()):
            w.writerow([repr(self.delta), repr(self.rectangle_t), "", n, m, v])
        return out.getvalue()


def incidence_report(family: CircleFamily, delta: float, eps_max: float,
                     records: list[RectangleTypeRecord] | None = None,
                     backend: str | None = None) -> IncidenceReport:
    """Bucket every pair with defect <= eps_max (annuli meeting) by (eps, t)."""
    start = time.perf_counter()
    i, j = kernels.scan(family.xs, family.ys, family.rs, tan_max=eps_max, gap_max=2 * delta,
                        d_lo=5e-324, collect=True, backend=backend)
    tan, d = pair_metric_arrays(family.xs, family.ys, family.rs, i, j)
    eps, t = bucket_of(tan, d, delta)
    keys, counts = np.unique(np.column_stack([eps, t]), axis=0, return_counts=True)
    buckets = {(float(e), float(s)): int(n) for (e, s), n in zip(keys, counts)}
    types = Counter((r.mu, r.nu) for r in records or [])
    elapsed = time.perf_counter() - start
    return IncidenceReport(
        family={"kind": family.kind.value, "size": len(family), "delta": family.delta, **family.params},
        delta=delta, eps_max=eps_max, buckets=buckets, rectangle_types=dict(types),
        rectangle_t=records[0].rectangle.t if records else None,
        seconds=elapsed, pairs_per_second=len(i) / elapsed if elapsed > 0 else 0.0)
