"""Experiment harness: configuration, command dispatch, output and CLI."""

from .config import ExperimentConfig, read_config_file, read_config_text
from .experiments import COLUMNS, ExperimentResult, run_experiment
from .output import render, write_result

__all__ = [
    "COLUMNS", "ExperimentConfig", "ExperimentResult", "read_config_file",
    "read_config_text", "render", "run_experiment", "write_result",
]
