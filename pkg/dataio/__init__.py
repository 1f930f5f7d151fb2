"""
Data I/O Module
File formats, run configuration and the synthetic dataset generator
"""

from .atomic import atomic_directory, atomic_path, read_yaml, write_csv, write_yaml
from .config import RunConfig, load_config, model_label, parse_model_label
from .monitors import MONITOR_COLUMNS, load_monitors, write_monitors
from .sensitivity import load_sensitivity, sensitivity_columns, write_sensitivity
from .posterior_io import (
    COPULA_FILE,
    MANIFEST_FILE,
    POSTERIOR_FILE,
    read_copula,
    read_posterior,
    write_copula,
    write_posterior,
)
from .synthetic import SyntheticSettings, SyntheticTruth, generate_synthetic, write_synthetic

__all__ = [
    'atomic_directory',
    'atomic_path',
    'read_yaml',
    'write_csv',
    'write_yaml',
    'RunConfig',
    'load_config',
    'model_label',
    'parse_model_label',
    'MONITOR_COLUMNS',
    'load_monitors',
    'write_monitors',
    'load_sensitivity',
    'sensitivity_columns',
    'write_sensitivity',
    'COPULA_FILE',
    'MANIFEST_FILE',
    'POSTERIOR_FILE',
    'read_copula',
    'read_posterior',
    'write_copula',
    'write_posterior',
    'SyntheticSettings',
    'SyntheticTruth',
    'generate_synthetic',
    'write_synthetic',
]
