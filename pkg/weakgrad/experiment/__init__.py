"""Experiment runner: configuration, LangGraph workflow and result writers."""

from weakgrad.experiment.config import ExperimentConfig, OutputFormat, load_config_file, resolve_config
from weakgrad.experiment.graph import execute, run_experiment

__all__ = [
    "ExperimentConfig",
    "OutputFormat",
    "execute",
    "load_config_file",
    "resolve_config",
    "run_experiment",
]
