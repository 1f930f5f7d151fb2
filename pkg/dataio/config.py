"""
Run Configuration
Flat YAML settings for every command, with command-line overrides
"""

import re
from dataclasses import asdict, dataclass, field as dc_field, fields
from pathlib import Path

from inference import McmcConfig
from spatial import GpHyperPrior
from src.errors import InputError

from .atomic import read_yaml

_LABEL = re.compile(r"^L(\d+)_M(\d+)_(GPD|NoGPD)$")


def model_label(L, M, use_gpd):
    """Short model name, e.g. L4_M2_GPD"""
    return f"L{L}_M{M}_{'GPD' if use_gpd else 'NoGPD'}"


def parse_model_label(label):
    """
    Inverse of model_label

    Returns:
        (L, M, use_gpd)
    """
    match = _LABEL.match(label.strip())
    if not match:
        raise InputError(f"bad model label '{label}', expected e.g. L4_M2_GPD")
    L, M = int(match.group(1)), int(match.group(2))
    check_model_settings(L, M)
    return L, M, match.group(3) == 'GPD'


def check_model_settings(L, M):
    if not (L == 1 or (L >= 2 and L % 2 == 0)):
        raise InputError(f"basis_functions must be 1 or an even number >= 2, got {L}")
    if M < 1:
        raise InputError(f"poly_order must be >= 1, got {M}")


@dataclass
class RunConfig:
    # paths
    sensitivity: str = 'data/synthetic/sensitivity.csv'
    prediction_grid: str = 'data/synthetic/sensitivity_thinned.csv'
    monitors: str = 'data/synthetic/monitors.csv'
    output_dir: str = 'runs/latest'
    # model
    basis_functions: int = 4
    poly_order: int = 2
    use_gpd: bool = True
    # sampler
    iterations: int = 25000
    burn_in: int = 10000
    target_acceptance: float = 0.4
    adapt_window: int = 50
    thin: int = 1
    progress_every: int = 1000
    alpha_prior_sd: float = 0.5
    c1: float = 100.0
    c2: float = 0.1
    c3: float = 0.1
    log_range_variance: float = 10.0
    # prediction
    scenarios: list = dc_field(default_factory=lambda: [
        'data/scenarios/s0_base.yaml', 'data/scenarios/s1_mobile_nox.yaml'])
    replicates: int = 10000
    order_statistic: int = 4
    exceed_thresholds: list = dc_field(default_factory=lambda: [75.0])
    keep_draws: bool = False
    # scoring
    train_fraction: float = 0.5
    score_levels: list = dc_field(default_factory=lambda: [0.75, 0.95, 0.99, 0.995])
    score_thresholds: list = dc_field(
        default_factory=lambda: [70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 100.0])
    model_grid: list = dc_field(default_factory=lambda: ['L1_M1_NoGPD', 'L4_M2_GPD'])
    # synthetic data
    n_sites: int = 50
    grid_nx: int = 20
    grid_ny: int = 20
    n_days: int = 92
    n_inputs: int = 6
    cell_km: float = 12.0
    true_xi: float = 0.1
    true_phi: float = 2.0
    # reproducibility
    seed: int = 0

    def __post_init__(self):
        check_model_settings(self.basis_functions, self.poly_order)
        for label in self.model_grid:
            parse_model_label(label)
        if not 0.0 < self.train_fraction < 1.0:
            raise InputError("train_fraction must lie in (0, 1)")
        if self.replicates < 1 or self.order_statistic < 1:
            raise InputError("replicates and order_statistic must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        self.mcmc()

    def mcmc(self):
        """Sampler settings as an McmcConfig"""
        return McmcConfig(
            iterations=self.iterations, burn_in=self.burn_in,
            target_acceptance=self.target_acceptance, seed=self.seed,
            adapt_window=self.adapt_window, alpha_prior_sd=self.alpha_prior_sd,
            hyperprior=GpHyperPrior(self.c1, self.c2, self.c3, self.log_range_variance),
            thin=self.thin, progress_every=self.progress_every,
        )

    def require_files(self, *keys):
        """Raise FileNotFoundError for any listed path setting that is missing"""
        for key in keys:
            path = getattr(self, key)
            for p in (path if isinstance(path, list) else [path]):
                if not Path(p).exists():
                    raise FileNotFoundError(f"{key}: file not found: {p}")

    def to_dict(self):
        return asdict(self)


def config_keys():
    return [f.name for f in fields(RunConfig)]


def load_config(path=None, overrides=None):
    """
    Build a RunConfig from an optional YAML file plus overrides

    Args:
        path: Flat YAML file, or None for defaults
        overrides: Dict of settings that win over the file (None values ignored)

    Returns:
        RunConfig
    """
    settings = read_yaml(path) if path else {}
    if not isinstance(settings, dict):
        raise InputError(f"{path}: config must be a flat mapping")
    settings.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(settings) - set(config_keys()))
    if unknown:
        raise InputError(f"unknown config key(s): {', '.join(unknown)}")
    return RunConfig(**settings)
