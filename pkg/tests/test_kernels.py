"""The compiled kernels and the numpy fallback must agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest

from circinc import kernels
from circinc.counting import arc_multiplicity, multiplicity_grid, type_rectangles
from circinc.families import UNIT_BOX, BipartitePair, delta_net_family, knapp_family

pytest.importorskip("numba")
BACKENDS = ("numpy", "numba")


@pytest.fixture
def family():
    return delta_net_family(0.06, UNIT_BOX, seed=9)


@pytest.mark.parametrize("kw", [{"tan_max": 0.01}, {"d_lo": 0.2, "d_hi": 0.5}, {"tan_max": 0.03, "gap_max": 0.06},
                                {}])
def test_scan_parity(family, kw):
    x, y, r = family.xs, family.ys, family.rs
    groups = (r > 0.75).astype(np.int64)
    for grp in (None, groups):
        counts = [kernels.scan(x, y, r, groups=grp, backend=b, **kw) for b in BACKENDS]
        pairs = [kernels.scan(x, y, r, groups=grp, collect=True, backend=b, **kw) for b in BACKENDS]
        assert counts[0] == counts[1] == pairs[0][0].size
        as_sets = [set(zip(np.minimum(i, j).tolist(), np.maximum(i, j).tolist())) for i, j in pairs]
        assert as_sets[0] == as_sets[1]


def test_raster_parity(family):
    grids = [multiplicity_grid(family, 0.03, 0.0125, (-0.5, 1.5, -0.5, 1.5), backend=b) for b in BACKENDS]
    assert np.array_equal(grids[0].counts, grids[1].counts)


def test_arc_parity(family):
    c = family.circle(11)
    (c0, w0), (c1, w1) = (arc_multiplicity(c, family, 0.03, backend=b) for b in BACKENDS)
    assert np.array_equal(c0, c1) and np.array_equal(w0, w1)


def test_rectangle_kernels_parity():
    delta = 2.0 ** -6
    fam = knapp_family(delta)
    pair = BipartitePair(fam.subset(np.flatnonzero(fam.rs < 1.5)), fam.subset(np.flatnonzero(fam.rs >= 1.5)),
                         0.5, cross_only=True)
    a, b = (type_rectangles(pair, delta, backend=be) for be in BACKENDS)
    assert a == b


def test_correlate_parity(rng):
    cells = rng.integers(0, 40, (300, 2))
    off = rng.integers(-5, 6, (50, 2))
    w = rng.random(50)
    out = [kernels.correlate_offsets(cells + 5, off, w, (51, 51), backend=b) for b in BACKENDS]
    assert np.allclose(out[0], out[1], rtol=0, atol=1e-12)
    cells3 = rng.integers(0, 10, (100, 3))
    off3 = rng.integers(-2, 3, (20, 3))
    out3 = [kernels.correlate_offsets(cells3 + 2, off3, np.ones(20), (15, 15, 15), backend=b) for b in BACKENDS]
    assert np.array_equal(out3[0], out3[1])


def test_greedy_net_parity(monkeypatch):
    nets = []
    for b in BACKENDS:
        monkeypatch.setattr(kernels, "_impl", kernels.backend_module(b))
        nets.append(delta_net_family(2 ** -4, UNIT_BOX, seed=21))
    assert np.array_equal(nets[0].xs, nets[1].xs) and np.array_equal(nets[0].rs, nets[1].rs)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


def _backend_under(value):
    env = dict(os.environ, CIRCINC_KERNELS=value)
    proc = subprocess.run([sys.executable, "-c", "import circinc.kernels as k; print(k.BACKEND)"],
                          env=env, capture_output=True, text=True)
    return proc.returncode, proc.stdout.strip(), proc.stderr


def test_environment_flag():
    assert _backend_under("numpy")[:2] == (0, "numpy")
    assert _backend_under("numba")[:2] == (0, "numba")
    code, _, err = _backend_under("cuda")
    assert code != 0 and "CIRCINC_KERNELS" in err
