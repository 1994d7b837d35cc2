"""Experiment orchestration: configs, exponent fits and report files."""
from .config import Experiment, ExperimentConfig, load_config, parse_config
from .experiments import REGISTRY
from .fit import FitResult, fit_exponent
from .main import main, run_experiment

__all__ = ["Experiment", "ExperimentConfig", "FitResult", "REGISTRY", "fit_exponent", "load_config", "main",
           "parse_config", "run_experiment"]
