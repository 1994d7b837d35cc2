import csv
import hashlib
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circinc.cli import (Experiment, ExperimentConfig, REGISTRY, fit_exponent, load_config, main, parse_config,
                         run_experiment)
from circinc.cli.experiments import DEFAULTS, ExperimentDef
from circinc.errors import ConfigError, DegenerateInput


# -- fits -------------------------------------------------------------------

def test_fit_examples():
    f = fit_exponent([(1, 1), (2, 4), (4, 16)])
    assert f.slope == pytest.approx(2.0) and f.r_squared == pytest.approx(1.0)
    assert f.predict(8) == pytest.approx(64.0)
    flat = fit_exponent([(1, 3), (2, 3), (4, 3)])
    assert flat.slope == pytest.approx(0.0, abs=1e-15) and flat.r_squared == 1.0


def test_fit_errors():
    with pytest.raises(DegenerateInput):
        fit_exponent([(2, 1), (2, 4), (2, 16)])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, 4)])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, 0), (4, 16)])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, math.inf), (4, 16)])


pos = st.floats(1e-6, 1e6, allow_nan=False)


@given(st.lists(st.tuples(pos, pos), min_size=3, max_size=30))
def test_fit_residual_identity(points):
    u = np.log([p[0] for p in points])
    if np.ptp(u) < 1e-6:
        return
    f = fit_exponent(points)
    res = f.residuals()
    # normal equations: residuals are orthogonal to 1 and to ln x
    scale = 1 + np.abs(res).sum()
    assert abs(res.sum()) <= 1e-9 * scale * len(points)
    assert abs(res @ (u - u.mean())) <= 1e-9 * scale * len(points) * (1 + np.abs(u).max())
    lnx, lny = np.array(f.points).T
    assert np.allclose(lny, f.intercept + f.slope * lnx + res, atol=1e-9)


# -- configs ------------------------------------------------------------------

def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return p


def test_command_names():
    assert Experiment.TRIPLE_COUNT.command == "triple-count"
    assert Experiment.ROT_CURV_DET.command == "rot-curv-det"
    assert set(REGISTRY) == set(Experiment)


def test_parse_fills_defaults_and_digest():
    cfg = parse_config({"version": 1, "experiment": "BernoulliTail", "params": {"N_max": 20}}, DEFAULTS)
    assert cfg.params["N_max"] == 20 and cfg.params["alpha"] == [0.1, 0.25, 0.5]
    again = parse_config({"version": 1, "experiment": "BernoulliTail", "params": {"N_max": 20}, "workers": 4},
                         DEFAULTS)
    assert cfg.digest() == again.digest()
    assert cfg.digest() != parse_config({"version": 1, "experiment": "BernoulliTail", "seed": 1}, DEFAULTS).digest()


@pytest.mark.parametrize("data,field", [
    ({"experiment": "TripleCount"}, "version"),
    ({"version": 2, "experiment": "TripleCount"}, "version"),
    ({"version": 1, "experiment": "Nope"}, "experiment"),
    ({"version": 1, "experiment": "TripleCount", "colour": 1}, "colour"),
    ({"version": 1, "experiment": "TripleCount", "params": {"M": [1]}}, "params.M"),
    ({"version": 1, "experiment": "TripleCount", "params": {"N": []}}, "params.N"),
    ({"version": 1, "experiment": "TripleCount", "params": {"N": [1.5]}}, "params.N[0]"),
    ({"version": 1, "experiment": "TripleCount", "params": {"N": "big"}}, "params.N"),
    ({"version": 1, "experiment": "BernoulliTail", "params": {"N_max": True}}, "params.N_max"),
    ({"version": 1, "experiment": "TripleCount", "seed": -1}, "seed"),
    ({"version": 1, "experiment": "TripleCount", "seed": 2 ** 64}, "seed"),
    ({"version": 1, "experiment": "TripleCount", "workers": 0}, "workers"),
])
def test_config_errors_name_the_field(data, field):
    with pytest.raises(ConfigError) as info:
        parse_config(data, DEFAULTS)
    assert info.value.field == field


def test_json_syntax_error_has_position(tmp_path):
    p = _write(tmp_path, '{"version": 1,\n "experiment": }')
    with pytest.raises(ConfigError) as info:
        load_config(p, DEFAULTS)
    assert "line 2" in str(info.value) and info.value.field == str(p)


@pytest.mark.parametrize("argv", [
    ["triple-count", "--config", "{cfg_bad}"],
    ["bernoulli-tail", "--config", "{cfg_other}"],
    ["bernoulli-tail", "--seed", "-3"],
    ["bernoulli-tail", "--workers", "0"],
    ["run"],
])
def test_config_error_exits_3_and_writes_nothing(tmp_path, argv, capsys):
    bad = _write(tmp_path, {"version": 1, "experiment": "TripleCount", "params": {"N": []}}, "bad.json")
    other = _write(tmp_path, {"version": 1, "experiment": "TripleCount"}, "other.json")
    out = tmp_path / "out"
    argv = [a.format(cfg_bad=bad, cfg_other=other) for a in argv] + ["--out", str(out)]
    assert main(argv) == 3
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


# -- runs ---------------------------------------------------------------------

SMALL_TAIL = {"version": 1, "experiment": "BernoulliTail", "params": {"N_max": 30, "p": [0.1, 0.5]}}


def test_run_writes_reports(tmp_path):
    cfg_path = _write(tmp_path, SMALL_TAIL)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    rows = list(csv.reader((out / "bernoulli-tail.csv").open()))
    assert rows[0] == ["N", "p", "alpha", "tail", "bound"]
    assert len(rows) == 1 + 30 * 2 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["error"] is None and summary["schema_version"] == 1
    assert summary["config"]["params"]["N_max"] == 30
    manifest = (out / "MANIFEST").read_text().splitlines()
    assert manifest[0] == f"{hashlib.sha256(cfg_path.read_bytes()).hexdigest()}  input:config"
    assert manifest[1].endswith("  input:resolved-config")
    for line in manifest[2:]:
        digest, name = line.split("  ")
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    dat = (out / "bernoulli-tail.dat").read_text()
    assert dat.startswith("# BernoulliTail\n")


def test_rerun_is_byte_identical(tmp_path):
    cfg = parse_config({"version": 1, "experiment": "KnappMultiplicity", "params": {"delta_exp": [6, 8]}}, DEFAULTS)
    assert run_experiment(cfg, tmp_path / "a") == 0
    assert run_experiment(cfg, tmp_path / "b", workers=2) == 0
    for name in ("knapp-multiplicity.csv", "knapp-multiplicity.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_failed_check_exits_2(tmp_path, monkeypatch):
    exp = Experiment.BERNOULLI_TAIL
    real = REGISTRY[exp].body

    def body(params, seed, workers, run):
        real(params, seed, workers, run)
        run.check("impossible", False, "forced")

    monkeypatch.setitem(REGISTRY, exp, ExperimentDef(REGISTRY[exp].header, DEFAULTS[exp], body))
    cfg = parse_config({"version": 1, "experiment": exp.value, "params": {"N_max": 5}}, DEFAULTS)
    assert run_experiment(cfg, tmp_path) == 2
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] is False and summary["error"] is None


def test_crash_keeps_partial_rows(tmp_path, monkeypatch):
    exp = Experiment.BERNOULLI_TAIL

    def body(params, seed, workers, run):
        run.emit([1, 0.5, 0.5, 0.25, 1.0])
        raise RuntimeError("boom")

    monkeypatch.setitem(REGISTRY, exp, ExperimentDef(REGISTRY[exp].header, DEFAULTS[exp], body))
    cfg = ExperimentConfig(exp, dict(DEFAULTS[exp]))
    assert run_experiment(cfg, tmp_path) == 1
    rows = (tmp_path / "bernoulli-tail.csv").read_text().splitlines()
    assert rows[1] == "1,0.5,0.5,0.25,1.0"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "boom" in summary["error"] and summary["passed"] is False


def test_numpy_scalars_are_written_plainly():
    from circinc.cli.main import _cell
    assert _cell(np.float64(0.1)) == "0.1"
    assert _cell(np.int64(3)) == "3"
    assert _cell(np.bool_(True)) == "True"
    assert _cell(1e-300) == "1e-300"
