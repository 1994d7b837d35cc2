"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick] [--csv out.csv]

Each workload runs once per backend to warm up (numba compiles on first
call), then ``--repeat`` more times; the best time is reported. Results from
the two backends are compared, so the table doubles as a parity check.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import timeit

import numpy as np

from circinc import kernels
from circinc.counting import arc_multiplicity, multiplicity_grid, type_rectangles
from circinc.estimates import circular_average_field, focusing_set
from circinc.families import UNIT_BOX, BipartitePair, delta_net_family, knapp_family

BACKENDS = ("numba", "numpy")


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-12)
    return a == b


def workloads(quick: bool):
    net = delta_net_family(2 ** -5 if quick else 2 ** -6, UNIT_BOX, seed=0)
    knapp_delta = 2.0 ** (-6 if quick else -8)
    knapp = knapp_family(knapp_delta)
    level_delta = 2.0 ** (-5 if quick else -7)
    split = BipartitePair(knapp.subset(np.flatnonzero(knapp.rs < 1.5)),
                          knapp.subset(np.flatnonzero(knapp.rs >= 1.5)), 0.5, cross_only=True)
    yield (f"scan count, delta-net n={len(net)}",
           lambda b: kernels.scan(net.xs, net.ys, net.rs, tan_max=net.delta, gap_max=2 * net.delta, backend=b))
    yield (f"annulus raster, Knapp n={len(knapp)}",
           lambda b: multiplicity_grid(knapp, knapp_delta, knapp_delta / 2, (-0.25, 0.25, -0.25, 0.25),
                                       backend=b).counts)
    yield (f"arc multiplicity, Knapp n={len(knapp)}",
           lambda b: arc_multiplicity(knapp.circle(len(knapp) // 2), knapp, knapp_delta, backend=b))
    yield (f"typed rectangles, Knapp split {split.sizes}",
           lambda b: tuple((r.mu, r.nu) for r in type_rectangles(split, knapp_delta, backend=b)))
    yield (f"circular average, annulus delta={level_delta}",
           lambda b: circular_average_field(focusing_set(level_delta), level_delta, level_delta / 2,
                                            backend=b).values)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args(argv)

    try:
        kernels.backend_module("numba")
    except RuntimeError:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    print(f"{'workload':48s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  agree")
    for name, fn in workloads(args.quick):
        best, results = {}, {}
        for b in BACKENDS:
            results[b] = fn(b)
            best[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        agree = _same(results["numba"], results["numpy"])
        speedup = best["numpy"] / best["numba"] if best["numba"] > 0 else math.inf
        rows.append([name, best["numba"], best["numpy"], speedup, agree])
        print(f"{name:48s} {best['numba']:10.4f} {best['numpy']:10.4f} {speedup:8.1f}  {agree}", flush=True)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["workload", "numba_seconds", "numpy_seconds", "speedup", "agree"])
            w.writerows(rows)
    return 0 if all(r[-1] for r in rows) else 2


if __name__ == "__main__":
    sys.exit(main())
