"""The experiment catalogue.

Each experiment is a function ``(params, seed, workers, run)`` that streams
CSV rows through ``run.emit`` and records fits, checks and plot series on
``run``. Defaults carry every seed explicitly; the global ``seed`` feeds the
Monte Carlo draws and the delta-net tie-breaking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .. import estimates, probab, pyth
from ..counting import (RectMode, count_delta_tangent_pairs, count_exact_tangent_pairs,
                        count_exact_tangent_pairs_bruteforce, generic_triple, high_multiplicity_fraction,
                        incidence_count, neighborhood_intersection_count, pairs_bruteforce,
                        three_circle_set_volume, type_rectangles, wolff_bound)
from ..families import (UNIT_BOX, band_split, bernoulli_thin, concat, delta_net_family, knapp_family,
                        lattice_family)
from ..geom_core import (DefiningFunction, DefiningKind, curvature_matrix, finite_difference_matrix,
                         pair_metrics, rotational_curvature_det, random_zero_set_point)
from ..parallel import map_ordered
from ..regions import RegionSpec
from ..rng import substream
from .config import Experiment
from .fit import FitResult, fit_exponent


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class Run:
    """Outputs of one experiment, filled in while it executes."""
    emit: Callable[[list], None]
    fits: dict[str, FitResult] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    series: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def check(self, name: str, passed, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class ExperimentDef:
    header: tuple[str, ...]
    defaults: dict
    body: Callable


# Large read-only inputs for pool workers. Pools fork, so children see what
# the parent stored here before mapping.
_SHARED: dict = {}


# ---------------------------------------------------------------------------
# counting experiments
# ---------------------------------------------------------------------------

def _triple_count(params, seed, workers, run: Run):
    k2, k1 = params["interval"]
    ratios = []
    for N, count in zip(params["N"], map_ordered(pyth.count_tangency_vectors, params["N"], workers)):
        ratio = count / (N * math.log(N))
        ratios.append(ratio)
        run.emit([N, count, ratio])
        run.series.setdefault("ratio", []).append((N, ratio))
        run.check(f"ratio N={N}", k2 <= ratio <= k1, f"{ratio:.4f} in [{k2}, {k1}]")
    run.check("interval width", k1 / k2 <= 10, f"k1/k2 = {k1 / k2:.3f}")
    if len(params["N"]) >= 3:
        run.fits["count"] = fit_exponent(zip(params["N"], [r * N * math.log(N) for r, N in
                                                           zip(ratios, params["N"])]))
    for N in params["oracle_N"]:
        fast, slow = pyth.count_tangency_vectors(N), pyth.count_tangency_vectors_bruteforce(N)
        run.check(f"oracle count N={N}", fast == slow, f"{fast} vs {slow}")
    top = max(params["oracle_N"])
    same = set(pyth.enumerate_primitive_triples(top)) == pyth.primitive_triples_bruteforce(top)
    run.check(f"oracle enumeration c<={top}", same)


def _lattice_point(N):
    fam = lattice_family(N)
    return len(fam), count_exact_tangent_pairs(fam)


def _lattice_tangency(params, seed, workers, run: Run):
    pts = []
    for N, (size, pairs) in zip(params["N"], map_ordered(_lattice_point, params["N"], workers)):
        oracle = ""
        if N <= params["oracle_max_N"]:
            oracle = count_exact_tangent_pairs_bruteforce(lattice_family(N))
            run.check(f"oracle N={N}", oracle == pairs, f"{pairs} vs {oracle}")
        run.emit([N, size, pairs, oracle])
        pts.append((size, pairs))
    run.series["pairs"] = pts
    lo, hi = params["slope"]
    fit = run.fits["pairs"] = fit_exponent(pts)
    run.check("slope", lo <= fit.slope <= hi, f"{fit.slope:.4f} in [{lo}, {hi}]")


def _delta_point(N, frac, d_lo, d_hi):
    fam = lattice_family(N)
    return len(fam), count_delta_tangent_pairs(fam, frac, d_lo, d_hi)


def _delta_pairs(params, seed, workers, run: Run):
    frac = params["delta_frac"]
    d_lo, d_hi = params["d_window"]
    pts = []
    task = partial(_delta_point, frac=frac, d_lo=d_lo, d_hi=d_hi)
    for N, (size, pairs) in zip(params["N"], map_ordered(task, params["N"], workers)):
        oracle = ""
        if N <= params["oracle_max_N"]:
            fam = lattice_family(N)
            i, _ = pairs_bruteforce(fam.xs, fam.ys, fam.rs, tan_max=math.nextafter(frac * fam.delta, 0.0),
                                    d_lo=d_lo, d_hi=d_hi)
            oracle = int(i.size)
            run.check(f"oracle N={N}", oracle == pairs, f"{pairs} vs {oracle}")
        run.emit([N, size, pairs, oracle])
        pts.append((size, pairs))
    run.series["pairs"] = pts
    fit = run.fits["pairs"] = fit_exponent(pts)
    run.check("slope", fit.slope >= params["min_slope"], f"{fit.slope:.4f} >= {params['min_slope']}")


def _knapp_point(k, c):
    delta = 2.0 ** -k
    fam = knapp_family(delta)
    lam = math.sqrt(delta)
    threshold = c / lam * len(fam) ** (2 / 3)
    frac = high_multiplicity_fraction(fam.circle(len(fam) // 2), fam, delta, threshold)
    return delta, lam, len(fam), threshold, frac


def _knapp_multiplicity(params, seed, workers, run: Run):
    lo, hi = params["band"]
    pts = []
    task = partial(_knapp_point, c=params["c"])
    for delta, lam, size, threshold, frac in map_ordered(task, params["delta_exp"], workers):
        run.emit([delta, lam, size, threshold, frac, frac / lam])
        pts.append((lam, frac))
        run.check(f"band delta={delta}", lo * lam <= frac <= hi * lam, f"fraction/lambda = {frac / lam:.4f}")
    run.series["fraction"] = pts
    if len(pts) >= 3 and all(f > 0 for _, f in pts):
        run.fits["fraction"] = fit_exponent(pts)


def _bipartite_sample(seed, delta, p, white, black):
    thinned = bernoulli_thin(_SHARED["net"], p, seed)
    return band_split(thinned, tuple(white), tuple(black), 1.0)


def _wolff_seed(seed, delta, p, white, black, grid, eps, C):
    pair = _bipartite_sample(seed, delta, p, white, black)
    m, n = pair.sizes
    recs = type_rectangles(pair, delta)
    mu = np.array([r.mu for r in recs], np.int64)
    nu = np.array([r.nu for r in recs], np.int64)
    rows = []
    for a, b in grid:
        count = int(np.count_nonzero((mu >= a) & (nu >= b)))
        bound = wolff_bound(m, n, a, b, eps, C)
        rows.append([seed, m, n, a, b, count, bound, count / bound])
    return rows


def _thinned_net(params, seed):
    delta = 2.0 ** -params["delta_exp"]
    _SHARED["net"] = delta_net_family(delta, UNIT_BOX, seed=seed)
    return delta, params["A"] * delta ** 1.5


def _wolff_rectangles(params, seed, workers, run: Run):
    delta, p = _thinned_net(params, seed)
    task = partial(_wolff_seed, delta=delta, p=p, white=params["white_radii"], black=params["black_radii"],
                   grid=params["mu_nu"], eps=params["eps"], C=params["C_eps"])
    try:
        per_seed = map_ordered(task, params["seeds"], workers)
    finally:
        _SHARED.clear()
    worst = 0.0
    for rows in per_seed:
        for row in rows:
            run.emit(row)
            worst = max(worst, row[-1])
            if row[3] == row[4]:
                run.series.setdefault(f"seed {row[0]}", []).append((row[3], row[5]))
    run.check("type counts within bound", worst <= 1.0, f"max count/bound = {worst:.4f}")


def _good_seed(seed, delta, p, white, black, A):
    pair = _bipartite_sample(seed, delta, p, white, black)
    m, n = pair.sizes
    union = concat([pair.white, pair.black])
    inc = incidence_count(union, delta, k=1.0)
    inc5 = incidence_count(union, delta, k=5.0)
    good = len(type_rectangles(pair, delta, RectMode.GOOD_ONLY, A=A))
    return [seed, m, n, inc, inc5, good]


def _good_rectangles(params, seed, workers, run: Run):
    delta, p = _thinned_net(params, seed)
    task = partial(_good_seed, delta=delta, p=p, white=params["white_radii"], black=params["black_radii"],
                   A=params["A"])
    try:
        rows = map_ordered(task, params["seeds"], workers)
    finally:
        _SHARED.clear()
    good_floor = params["c"] * delta ** -2
    inc_cap = delta ** -params["incidence_exponent"]
    ok = 0
    for row in rows:
        run.emit(row)
        run.series.setdefault("good", []).append((row[0], row[5]))
        ok += row[5] >= good_floor and row[3] <= inc_cap
    share = ok / len(rows)
    run.notes.update(good_floor=good_floor, incidence_cap=inc_cap)
    run.check("seeds with many good rectangles and few incidences", share >= params["min_seed_fraction"],
              f"{ok}/{len(rows)} seeds (good >= {good_floor:.0f}, incidences <= {inc_cap:.0f})")


def _two_circle_count(params, seed, workers, run: Run):
    delta = 2.0 ** -params["delta_exp"]
    net = delta_net_family(delta, UNIT_BOX, seed=seed)
    gen = substream(seed, 0)
    t = params["t"]
    worst = 0.0
    for draw in range(params["draws"]):
        i, j = (int(v) for v in gen.integers(len(net), size=2))
        c1, c2 = net.circle(i), net.circle(j)
        if pair_metrics(c1, c2)[1] == 0:
            continue
        for f in params["eps_factors"]:
            res = neighborhood_intersection_count(net, c1, c2, f * delta, t)
            ratio = res.count / res.bound
            worst = max(worst, ratio)
            run.emit([draw, i, j, f * delta, res.count, res.bound, ratio])
            run.series.setdefault(f"eps={f}delta", []).append((res.bound, res.count))
    run.check("counts within bound", worst <= params["C"], f"max count/bound = {worst:.4f} <= {params['C']}")


def _volume_point(index, seed, eps, t, lam, trials):
    c1, c2, c3 = generic_triple(substream(seed, index), t, lam)
    return three_circle_set_volume(c1, c2, c3, eps, t, lam, trials, seed + index)


def _three_circle_volume(params, seed, workers, run: Run):
    eps = 2.0 ** -params["eps_exp"]
    t, lam = params["t"], params["lam"]
    scale = eps ** 3 / lam ** 3
    task = partial(_volume_point, seed=seed, eps=eps, t=t, lam=lam, trials=params["trials"])
    worst = 0.0
    for index, est in enumerate(map_ordered(task, range(params["triples"]), workers)):
        ratio = est.estimate / scale
        worst = max(worst, ratio)
        run.emit([index, est.estimate, est.stderr, scale, ratio])
        run.series.setdefault("ratio", []).append((index, ratio))
    run.check("volume bound", worst <= params["factor"], f"max volume / (eps/lam)^3 = {worst:.4f}")


# ---------------------------------------------------------------------------
# probability experiments
# ---------------------------------------------------------------------------

def _bernoulli_tail(params, seed, workers, run: Run):
    violations = 0
    for N in range(1, params["N_max"] + 1):
        worst = 0.0
        for p in params["p"]:
            for alpha in params["alpha"]:
                tail = probab.binomial_tail(N, p, alpha)
                bound = probab.tail_bound(N, p, alpha)
                violations += tail > bound
                worst = max(worst, tail / bound)
                run.emit([N, p, alpha, tail, bound])
        run.series.setdefault("max tail/bound", []).append((N, worst))
    run.check("tail below bound", violations == 0, f"{violations} violations")


def _fragments(k: int) -> RegionSpec:
    ang = 2 * math.pi * np.arange(k) / k
    centres = np.column_stack([3 * np.cos(ang), 3 * np.sin(ang)])
    return RegionSpec.union_of_balls(centres, 1 / math.sqrt(k))


def _simplex_prob(params, seed, workers, run: Run):
    disk = RegionSpec.ball((0.0, 0.0), 1.0)
    trials = params["trials"]
    eps_grid = params["eps"]
    est = {}
    for k, eps in enumerate(eps_grid):
        e = probab.simplex_probability(disk, 3, eps, trials, seed + k, workers=workers)
        est[eps] = e
        run.emit(["ball", eps, e.estimate, e.stderr, e.successes, e.trials])
    x = np.array(eps_grid)
    y = np.array([est[e].estimate for e in eps_grid])
    C = float(x @ y / (x @ x))
    resid = float(np.linalg.norm(y - C * x) / np.linalg.norm(y))
    run.notes.update(C=C, relative_residual=resid)
    run.series["ball"] = list(zip(x.tolist(), y.tolist()))
    if len(eps_grid) >= 3 and (y > 0).all():
        run.fits["ball"] = fit_exponent(zip(x, y))
    c_lo, c_hi = params["C_range"]
    run.check("linear constant", c_lo <= C <= c_hi, f"C = {C:.4f} in [{c_lo}, {c_hi}]")
    run.check("linearity", resid < params["max_residual"], f"relative residual {resid:.4f}")

    feps = params["fragment_eps"]
    base = len(eps_grid)
    ball = est.get(feps) or probab.simplex_probability(disk, 3, feps, trials, seed + base, workers=workers)
    for n, k in enumerate(params["fragments"]):
        f = probab.simplex_probability(_fragments(k), 3, feps, trials, seed + base + 1 + n, workers=workers)
        run.emit([f"fragments{k}", feps, f.estimate, f.stderr, f.successes, f.trials])
        margin = 3 * math.hypot(f.stderr, ball.stderr)
        run.check(f"rearrangement k={k}", f.estimate <= ball.estimate + margin,
                  f"{f.estimate:.5f} <= {ball.estimate:.5f} + {margin:.5f}")

    mp = probab.simplex_probability(disk, 3, 0.0, params["perturbed_trials"], seed + base + 1 + len(params["fragments"]),
                                    mode=probab.SimplexMode.MIN_PERTURBED, delta=params["perturbed_delta"],
                                    workers=workers)
    run.emit(["min_perturbed", params["perturbed_delta"], mp.estimate, mp.stderr, mp.successes, mp.trials])
    run.notes["min_perturbed_floor"] = mp.params["floor"]
    run.check("positive robust floor", mp.ci_low > 0, f"estimate {mp.estimate:.4f}")


# ---------------------------------------------------------------------------
# level sets and curvature
# ---------------------------------------------------------------------------

_SETS = {"focusing": estimates.focusing_set, "knapp": estimates.knapp_set, "scaling": estimates.scaling_set}


def _circular_point(job, dimension):
    k, name = job
    delta = 2.0 ** -k
    field_ = estimates.circular_average_field(_SETS[name](delta), delta, delta / 2, dimension)
    out = []
    for lam in estimates.lambda_grid(delta):
        r = estimates.circular_average_levelset(None, delta, lam, delta / 2, dimension, field=field_)
        out.append(r)
    return out


def _circular_level_set(params, seed, workers, run: Run):
    jobs = [(k, name) for k in params["delta_exp"] for name in params["examples"]]
    best: dict[str, float] = {}
    for (k, name), results in zip(jobs, map_ordered(partial(_circular_point, dimension=params["dimension"]),
                                                    jobs, workers)):
        top = 0.0
        for r in results:
            run.emit([r.delta, r.lam, name, r.measure_E, r.measure_F, r.ratio])
            top = max(top, r.ratio)
        run.series.setdefault(name, []).append((r.delta, top))
        best[name] = max(best.get(name, 0.0), top)
    C = params["C"]
    run.notes["max_ratio"] = best
    run.check("restricted weak type", max(best.values()) <= C, f"max ratio {max(best.values()):.5f} <= {C}")
    if "focusing" in best:
        run.check("focusing tightness", best["focusing"] >= params["tightness"] * C,
                  f"focusing {best['focusing']:.5f} >= {params['tightness']} * {C}")


def _cone_point(job):
    k, name = job
    delta = 2.0 ** -k
    E = RegionSpec.box((0.0, 0.0), (1.0, 1.0)) if name == "box" else _SETS[name](delta)
    field_ = estimates.cone_average_field(E, delta, delta / 2)
    lams = [0.5] if name == "box" else estimates.lambda_grid(delta)
    return [estimates.cone_average_levelset(None, delta, lam, delta / 2, field=field_) for lam in lams]


def _cone_level_set(params, seed, workers, run: Run):
    jobs = [(k, name) for k in params["delta_exp"] for name in params["examples"]]
    jobs.append((params["box_delta_exp"], "box"))
    best: dict[tuple, object] = {}
    for (k, name), results in zip(jobs, map_ordered(_cone_point, jobs, workers)):
        for r in results:
            run.emit([r.delta, r.lam, name, r.measure_E, r.measure_F, r.ratio])
            if name != "box":
                run.series.setdefault(f"{name} delta=2^-{k}", []).append((r.lam, r.ratio))
        best[k, name] = max(results, key=lambda r: r.ratio)
    C = params["C"]
    top = max(r.ratio for r in best.values())
    run.check("cone bound", top <= C and math.isfinite(top), f"max ratio {top:.5f} <= {C}")
    for k in params["delta_exp"]:
        if (k, "knapp") in best and (k, "scaling") in best:
            kn, sc = best[k, "knapp"], best[k, "scaling"]
            run.check(f"knapp beats scaling delta=2^-{k}", kn.ratio >= sc.ratio,
                      f"{kn.ratio:.5f} vs {sc.ratio:.5f}")
            target = math.sqrt(kn.delta) / (4 * math.pi)
            run.check(f"knapp optimal lambda delta=2^-{k}", target / 4 <= kn.lam <= 4 * target,
                      f"lambda* = {kn.lam:.5g}, sqrt(delta)/(4 pi) = {target:.5g}")


def _rot_curv_det(params, seed, workers, run: Run):
    for n, (kind, dim) in enumerate(params["cases"]):
        phi = DefiningFunction(DefiningKind(kind), int(dim))
        gen = substream(seed, n)
        dets, errs = [], []
        for _ in range(params["points"]):
            x, y = random_zero_set_point(phi, gen)
            dets.append(abs(rotational_curvature_det(phi, x, y)))
            m = curvature_matrix(phi, x, y)
            errs.append(float(np.abs(m - finite_difference_matrix(phi, x, y)).max() / np.abs(m).max()))
        lo, err = min(dets), max(errs)
        run.emit([kind, dim, params["points"], lo, err])
        run.check(f"{kind} d={dim} determinant", lo >= params["min_det"], f"min |det| = {lo:.4f}")
        run.check(f"{kind} d={dim} finite differences", err <= params["fd_tol"], f"max relative error {err:.2e}")
        run.series.setdefault("min |det|", []).append((dim, lo))


# ---------------------------------------------------------------------------

REGISTRY: dict[Experiment, ExperimentDef] = {
    Experiment.TRIPLE_COUNT: ExperimentDef(
        ("N", "count", "ratio"),
        {"N": [2 ** k for k in range(8, 15)], "interval": [2.5, 4.0], "oracle_N": [100, 500, 1000, 2000]},
        _triple_count),
    Experiment.LATTICE_TANGENCY: ExperimentDef(
        ("N", "circles", "pairs", "oracle"),
        {"N": [8, 16, 32, 64], "oracle_max_N": 16, "slope": [1.28, 1.45]},
        _lattice_tangency),
    Experiment.DELTA_PAIRS: ExperimentDef(
        ("N", "circles", "pairs", "oracle"),
        {"N": [8, 16, 32], "delta_frac": 0.01, "d_window": [0.5, 2.0], "oracle_max_N": 16, "min_slope": 1.55},
        _delta_pairs),
    Experiment.KNAPP_MULTIPLICITY: ExperimentDef(
        ("delta", "lambda", "circles", "threshold", "fraction", "fraction_over_lambda"),
        {"delta_exp": [6, 8, 10], "c": 0.25, "band": [0.125, 8.0]},
        _knapp_multiplicity),
    Experiment.WOLFF_RECTANGLES: ExperimentDef(
        ("seed", "m", "n", "mu", "nu", "count", "bound", "ratio"),
        {"delta_exp": 8, "A": 8.0, "seeds": [1, 2, 3], "white_radii": [0.5, 0.5625],
         "black_radii": [0.9375, 1.0], "mu_nu": [[1, 1], [2, 2], [4, 4], [8, 8], [2, 1], [1, 4]],
         "eps": 0.0, "C_eps": 1.0},
        _wolff_rectangles),
    Experiment.GOOD_RECTANGLES: ExperimentDef(
        ("seed", "white", "black", "incidences", "incidences_5delta", "good"),
        {"delta_exp": 8, "A": 8.0, "seeds": list(range(1, 21)), "white_radii": [0.5, 0.5625],
         "black_radii": [0.9375, 1.0], "c": 0.05, "incidence_exponent": 2.1, "min_seed_fraction": 0.9},
        _good_rectangles),
    Experiment.BERNOULLI_TAIL: ExperimentDef(
        ("N", "p", "alpha", "tail", "bound"),
        {"N_max": 200, "p": [round(0.05 * k, 2) for k in range(1, 11)], "alpha": [0.1, 0.25, 0.5]},
        _bernoulli_tail),
    Experiment.SIMPLEX_PROB: ExperimentDef(
        ("set", "eps", "estimate", "stderr", "successes", "trials"),
        {"eps": [0.01, 0.02, 0.05, 0.1], "trials": 1_000_000, "C_range": [1.0, 40.0], "max_residual": 0.15,
         "fragment_eps": 0.05, "fragments": [2, 3, 4, 5], "perturbed_delta": 0.01, "perturbed_trials": 100_000},
        _simplex_prob),
    Experiment.THREE_CIRCLE_VOLUME: ExperimentDef(
        ("triple", "estimate", "stderr", "scale", "ratio"),
        {"triples": 20, "eps_exp": 10, "t": 0.5, "lam": 0.25, "trials": 1_000_000, "factor": 50.0},
        _three_circle_volume),
    Experiment.TWO_CIRCLE_COUNT: ExperimentDef(
        ("draw", "i", "j", "eps", "count", "bound", "ratio"),
        {"delta_exp": 7, "draws": 50, "eps_factors": [4.0, 8.0], "t": 0.5, "C": 1.0},
        _two_circle_count),
    Experiment.CIRCULAR_LEVEL_SET: ExperimentDef(
        ("delta", "lambda", "E_kind", "E", "F", "ratio"),
        {"delta_exp": [5, 6, 7, 8], "examples": ["focusing", "knapp", "scaling"], "dimension": 2,
         "C": 0.01, "tightness": 0.01},
        _circular_level_set),
    Experiment.CONE_LEVEL_SET: ExperimentDef(
        ("delta", "lambda", "E_kind", "E", "F", "ratio"),
        {"delta_exp": [5, 6], "examples": ["knapp", "scaling"], "box_delta_exp": 5, "C": 0.2},
        _cone_level_set),
    Experiment.ROT_CURV_DET: ExperimentDef(
        ("kind", "dimension", "points", "min_abs_det", "max_fd_error"),
        {"points": 1000, "cases": [["Sphere", "2"], ["Sphere", "3"], ["Plane", "2"], ["Plane", "3"]],
         "min_det": 0.5, "fd_tol": 1e-4},
        _rot_curv_det),
}

DEFAULTS = {exp: spec.defaults for exp, spec in REGISTRY.items()}
