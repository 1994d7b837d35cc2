"""Versioned JSON experiment configuration.

A config file looks like::

    {"version": 1, "experiment": "TripleCount", "seed": 0, "workers": 1,
     "params": {"N": [256, 512]}}

Every key other than ``version`` and ``experiment`` is optional. Parameters
not given fall back to the experiment's built-in defaults, and each default
already names its seeds, so nothing depends on the clock.
"""
from __future__ import annotations

import copy
import enum
import hashlib
import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigError

SCHEMA_VERSION = 1
SEED_MAX = (1 << 64) - 1
_TOP_KEYS = {"version", "experiment", "seed", "workers", "out", "params"}


class Experiment(enum.Enum):
    TRIPLE_COUNT = "TripleCount"
    LATTICE_TANGENCY = "LatticeTangency"
    DELTA_PAIRS = "DeltaPairs"
    KNAPP_MULTIPLICITY = "KnappMultiplicity"
    WOLFF_RECTANGLES = "WolffRectangles"
    GOOD_RECTANGLES = "GoodRectangles"
    BERNOULLI_TAIL = "BernoulliTail"
    SIMPLEX_PROB = "SimplexProb"
    THREE_CIRCLE_VOLUME = "ThreeCircleVolume"
    TWO_CIRCLE_COUNT = "TwoCircleCount"
    CIRCULAR_LEVEL_SET = "CircularLevelSet"
    CONE_LEVEL_SET = "ConeLevelSet"
    ROT_CURV_DET = "RotCurvDet"

    @property
    def command(self) -> str:
        """Kebab-case subcommand name, e.g. ``triple-count``."""
        out = []
        for ch in self.value:
            if ch.isupper() and out:
                out.append("-")
            out.append(ch.lower())
        return "".join(out)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    params: dict[str, Any]
    seed: int = 0
    workers: int = 1
    out: str | None = None
    source: bytes = field(default=b"", repr=False, compare=False)

    def resolved(self) -> dict:
        """The fully expanded config, as written to the summary."""
        return {"version": SCHEMA_VERSION, "experiment": self.experiment.value, "seed": self.seed,
                "params": self.params}

    def digest(self) -> str:
        text = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _same_shape(name: str, value, default):
    """Check ``value`` against the type of ``default`` (recursively for lists)."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("expected true or false", name)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise ConfigError(f"expected an integer, got {json.dumps(value)}", name)
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ConfigError(f"expected a number, got {json.dumps(value)}", name)
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("expected a string", name)
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError("expected a list", name)
        if not value:
            raise ConfigError("grid must be nonempty", name)
        proto = default[0]
        return [_same_shape(f"{name}[{i}]", v, proto) for i, v in enumerate(value)]
    raise ConfigError("unsupported parameter type", name)


def _check_seed(value, name="seed") -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= SEED_MAX:
        raise ConfigError("expected an unsigned 64-bit integer", name)
    return value


def parse_config(data: dict, defaults: dict[Experiment, dict], experiment: Experiment | None = None,
                 source: bytes = b"") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError("unknown key", unknown[0])
    if "version" not in data:
        raise ConfigError("missing schema version", "version")
    if data["version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {data['version']!r} (expected {SCHEMA_VERSION})",
                          "version")
    name = data.get("experiment", experiment.value if experiment else None)
    if name is None:
        raise ConfigError("missing experiment name", "experiment")
    try:
        exp = Experiment(name)
    except ValueError:
        raise ConfigError(f"unknown experiment {name!r}", "experiment") from None
    if experiment is not None and exp is not experiment:
        raise ConfigError(f"config is for {exp.value}, not {experiment.value}", "experiment")

    params = copy.deepcopy(defaults[exp])
    given = data.get("params", {})
    if not isinstance(given, dict):
        raise ConfigError("expected an object", "params")
    for key, value in given.items():
        if key not in params:
            raise ConfigError("unknown parameter", f"params.{key}")
        params[key] = _same_shape(f"params.{key}", value, params[key])

    seed = _check_seed(data.get("seed", 0))
    workers = data.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("expected a positive integer", "workers")
    out = data.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("expected a path string", "out")
    return ExperimentConfig(exp, params, seed, workers, out, source)


def load_config(path: str | Path, defaults: dict[Experiment, dict],
                experiment: Experiment | None = None) -> ExperimentConfig:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise ConfigError("config is not UTF-8 text", str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{exc.msg} at line {exc.lineno} column {exc.colno}", str(path)) from None
    return parse_config(data, defaults, experiment, raw)
