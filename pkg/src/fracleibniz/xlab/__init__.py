"""Experiment layer: ratio probes, slope fits, emission and the CLI."""

from .emit import COLUMNS, emit, read_csv
from .fit import SlopeFit, fit_slope
from .probes import PROBES, ConfigError, ProbeRecord, RatioProbe, load_config, probe_from_config, run_probe

__all__ = [
    "COLUMNS",
    "ConfigError",
    "PROBES",
    "ProbeRecord",
    "RatioProbe",
    "SlopeFit",
    "emit",
    "fit_slope",
    "load_config",
    "probe_from_config",
    "read_csv",
    "run_probe",
]
