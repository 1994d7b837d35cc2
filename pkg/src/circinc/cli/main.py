"""Command-line entry point: ``circinc <experiment> [--config F] [--out D] [--workers N] [--seed S]``.

Exit codes: 0 when every check passes, 2 when a check fails, 3 for a bad
config (nothing is written), 1 for anything unexpected (rows produced so far
stay on disk, with the error in summary.json).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
import traceback
from importlib import metadata
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .config import SCHEMA_VERSION, Experiment, ExperimentConfig, load_config, parse_config
from .experiments import DEFAULTS, REGISTRY, Run

EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2, 3


def _cell(v) -> str:
    # numpy scalars print with their type name under numpy 2, so unwrap them
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _write_dat(path: Path, exp: Experiment, series: dict) -> None:
    """gnuplot-ready blocks, one per series (select with ``index``)."""
    with path.open("w") as fh:
        fh.write(f"# {exp.value}\n")
        for k, (name, pts) in enumerate(series.items()):
            if k:
                fh.write("\n\n")
            fh.write(f"# {name}\n")
            for x, y in pts:
                fh.write(f"{_cell(float(x))} {_cell(float(y))}\n")


def run_experiment(config: ExperimentConfig, out_dir: str | Path, workers: int | None = None) -> int:
    """Run one experiment and write its report files; returns the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = REGISTRY[config.experiment]
    stem = config.experiment.command
    csv_path, dat_path = out / f"{stem}.csv", out / f"{stem}.dat"
    summary_path = out / "summary.json"
    workers = config.workers if workers is None else workers

    started = time.perf_counter()
    error = None
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(spec.header)
        fh.flush()

        def emit(row):
            writer.writerow([_cell(v) for v in row])
            fh.flush()

        run = Run(emit)
        try:
            spec.body(config.params, config.seed, workers, run)
        except Exception as exc:  # reported in the summary, rows so far are kept
            error = "".join(traceback.format_exception_only(type(exc), exc)).strip()
            traceback.print_exc()
    _write_dat(dat_path, config.experiment, run.series)

    passed = error is None and run.passed
    summary = {
        "experiment": config.experiment.value,
        "schema_version": SCHEMA_VERSION,
        "package_version": _version(),
        "config": config.resolved(),
        "workers": workers,
        "passed": passed,
        "error": error,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in run.checks],
        "fits": {k: f.to_dict() for k, f in run.fits.items()},
        "notes": run.notes,
        "wall_seconds": round(time.perf_counter() - started, 3),
    }
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")

    lines = []
    if config.source:
        lines.append(f"{hashlib.sha256(config.source).hexdigest()}  input:config")
    lines.append(f"{config.digest()}  input:resolved-config")
    for p in (csv_path, dat_path, summary_path):
        lines.append(f"{_sha256(p)}  {p.name}")
    (out / "MANIFEST").write_text("\n".join(lines) + "\n")

    for c in run.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    if error is not None:
        return EXIT_ERROR
    return EXIT_OK if passed else EXIT_FAILED


def _add_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="versioned JSON config")
    p.add_argument("--out", type=Path, help="output directory (default results/<experiment>)")
    p.add_argument("--workers", type=int, help="worker processes; never changes results")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circinc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_flags(sub.add_parser("run", help="run the experiment named in --config"))
    for exp in Experiment:
        _add_flags(sub.add_parser(exp.command, help=f"run {exp.value}"))
    return parser


def resolve(args) -> tuple[ExperimentConfig, Path]:
    """Merge config file and flags; raises ConfigError before anything is written."""
    by_command = {e.command: e for e in Experiment}
    experiment = by_command.get(args.command)
    if args.config is not None:
        cfg = load_config(args.config, DEFAULTS, experiment)
        data = {"version": SCHEMA_VERSION, "experiment": cfg.experiment.value, "seed": cfg.seed,
                "workers": cfg.workers, "params": cfg.params}
        if cfg.out is not None:
            data["out"] = cfg.out
        source = cfg.source
    elif experiment is None:
        raise ConfigError("the run command needs --config", "config")
    else:
        data = {"version": SCHEMA_VERSION, "experiment": experiment.value}
        source = b""
    if args.seed is not None:
        data["seed"] = args.seed
    if args.workers is not None:
        data["workers"] = args.workers
    cfg = parse_config(data, DEFAULTS, experiment, source)
    out = args.out or (Path(cfg.out) if cfg.out else Path("results") / cfg.experiment.command)
    return cfg, out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, out = resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_experiment(cfg, out)
    except Exception:
        traceback.print_exc()
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
