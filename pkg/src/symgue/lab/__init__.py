"""Experiment orchestration, reports and the command-line interface."""
from .config import (DEFAULT_THRESHOLDS, EXPERIMENT_DEFAULTS, EXPERIMENTS, ExperimentConfig,
                     build_config, default_config, format_complex, parse_complex)
from .experiments import (RUNNERS, run_adjudicate3, run_atom, run_bench, run_correlator,
                          run_experiment, run_identities, run_laws, run_ncm, run_variance)
from .report import ExperimentReport, emit

__all__ = [
    "DEFAULT_THRESHOLDS", "EXPERIMENT_DEFAULTS", "EXPERIMENTS", "ExperimentConfig",
    "ExperimentReport", "RUNNERS", "build_config", "default_config", "emit", "format_complex",
    "parse_complex", "run_adjudicate3", "run_atom", "run_bench", "run_correlator",
    "run_experiment", "run_identities", "run_laws", "run_ncm", "run_variance",
]
