"""Experiment configuration, drivers, diagnostics and the command-line interface."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config_text
from .diagnostics import Report, diagnostics
from .experiments import (ExperimentResult, RateFit, chaos_rate_experiment, cutoff_rate_experiment,
                          equilibration_experiment, fit_rate, iid_baseline, run_experiment, simulate)
from .streams import stream
