"""
Synthetic Data Generator
Builds a smooth random sensitivity field, a known parameter state and monitor
observations simulated from it, so the whole pipeline can run without
proprietary inputs
"""

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from inference import PosteriorDraws, PosteriorState, flatten_state, parameter_names
from inference.copula import ar1_latent
from inference import MonitorDataset
from predict import simulate_site_year
from rfm import SensitivityField, evaluate_rfm_at
from spatial import ExponentialCorrelation
from src.errors import InputError
from src.seeding import substream
from tail import ConditionalModelParams, QuantileBasis

from .atomic import write_yaml
from .monitors import write_monitors
from .posterior_io import write_posterior
from .sensitivity import write_sensitivity

TRUE_RANGE_KM = 100.0
FIELD_RANGE_KM = 80.0


@dataclass
class SyntheticSettings:
    n_sites: int = 50
    grid_nx: int = 20
    grid_ny: int = 20
    n_days: int = 92
    n_inputs: int = 6
    cell_km: float = 12.0
    basis_functions: int = 1
    poly_order: int = 1
    use_gpd: bool = True
    true_xi: float = 0.1
    true_phi: float = 2.0

    def __post_init__(self):
        if self.n_sites < 1 or self.n_days < 1 or self.n_inputs < 1:
            raise InputError("need at least one site, day and input")
        if self.n_sites > self.grid_nx * self.grid_ny:
            raise InputError("more sites than grid cells")
        if not self.true_phi > 0:
            raise InputError("true_phi must be positive")

    @classmethod
    def from_config(cls, config):
        """Geometry and tail settings of a RunConfig; the truth keeps its own L, M and GPD flag"""
        keys = set(cls.__dataclass_fields__) - {'basis_functions', 'poly_order', 'use_gpd'}
        return cls(**{k: getattr(config, k) for k in keys})


@dataclass
class SyntheticTruth:
    """Generating parameters, emitted next to the data for recovery checks"""
    state: PosteriorState
    phi: float
    settings: SyntheticSettings
    site_ids: np.ndarray
    site_xy: np.ndarray
    n_days: int

    def as_draws(self, input_names):
        names = parameter_names(self.state, self.site_ids, input_names)
        return PosteriorDraws(flatten_state(self.state)[None, :], names, self.state.copy(),
                              self.site_ids, self.site_xy, input_names)


def _smooth_fields(xy, n_fields, rng, range_km=FIELD_RANGE_KM):
    corr = ExponentialCorrelation(xy, range_km)
    lower = np.tril(corr.factor[0])
    return rng.standard_normal((n_fields, len(xy))) @ lower.T


def synthetic_field(settings, rng):
    """
    Smooth random base run and sensitivities on a regular grid

    Base: 45 ppb plus a spatial pattern, a smooth east-west trend, an AR(1)
    day effect and correlated daily noise. First-order terms have their own
    spatial pattern and daily modulation per input; second-order terms are
    small multiples of them.
    """
    nx, ny, n_days, d = settings.grid_nx, settings.grid_ny, settings.n_days, settings.n_inputs
    rows, cols = np.divmod(np.arange(nx * ny), nx)
    xy = np.column_stack([(cols + 0.5) * settings.cell_km, (rows + 0.5) * settings.cell_km])
    cell_ids = np.array([f"r{r:02d}c{c:02d}" for r, c in zip(rows, cols)], dtype=object)
    extent = max(nx, ny) * settings.cell_km

    pattern = _smooth_fields(xy, 1 + d, rng)
    daily_noise = _smooth_fields(xy, n_days, rng)
    day_effect = ar1_latent(n_days, 3.0, rng)
    base = (45.0 + 6.0 * pattern[0] + 10.0 * xy[:, 0] / extent
            + 8.0 * day_effect[:, None] + 3.0 * daily_noise)

    modulation = ar1_latent(n_days, 2.0, rng, size=(d,))
    magnitude = 8.0 * 0.75 ** np.arange(d) * np.where(np.arange(d) < 3, 1.0, -1.0)
    first = (magnitude[:, None, None]
             * np.exp(0.3 * pattern[1:, None, :] + 0.4 * modulation[:, :, None]))
    diag = -0.3 * first
    field = SensitivityField(cell_ids=cell_ids, xy=xy, base=base, first_order=first,
                             second_order_diag=diag,
                             second_order_cross=np.zeros((d * (d - 1) // 2, n_days, nx * ny)))
    for p, (l, j) in enumerate(field.pairs):
        field.second_order_cross[p] = 0.05 * (first[l] + first[j])
    return field


def _truth_hypers(process, m1):
    mean, var = np.zeros(m1), np.full(m1, 0.0025)
    if process == 'beta':
        mean[:2], var[:2] = [50.0, 12.0], [9.0, 1.0]
    elif process.startswith('theta_'):
        mean[:2], var[:2] = [np.log(6.0), 0.1], [0.02, 0.005]
    else:
        mean[0], var[0] = np.log(5.0), 0.02
    return mean, var


def truth_state(settings, site_xy, rng):
    """Parameters drawn from GP priors with fixed hypers at the site locations"""
    basis = QuantileBasis(settings.basis_functions)
    order, m1 = settings.poly_order, settings.poly_order + 1
    model = ConditionalModelParams.zeros(basis, order, len(site_xy), settings.use_gpd)
    names = model.site_process_names()
    gp_mean = np.empty((len(names), m1))
    gp_variance = np.empty((len(names), m1))
    lower = np.tril(ExponentialCorrelation(site_xy, TRUE_RANGE_KM).factor[0])
    for k, proc in enumerate(names):
        gp_mean[k], gp_variance[k] = _truth_hypers(proc, m1)
        draws = lower @ rng.standard_normal((len(site_xy), m1))
        model.process(proc)[:] = gp_mean[k] + np.sqrt(gp_variance[k]) * draws
    if settings.use_gpd:
        model.xi[0] = settings.true_xi
    alpha = np.clip(rng.normal(0.0, 0.2, settings.n_inputs), -0.6, 0.6)
    return PosteriorState(alpha, model, gp_mean, gp_variance, TRUE_RANGE_KM)


def generate_synthetic(settings, seed, state=None, verbose=False):
    """
    Generate a sensitivity field, monitor data and the truth behind them

    Args:
        settings: SyntheticSettings
        seed: Master seed (uses the 'synthetic' substream)
        state: Optional PosteriorState to use as the truth (shapes must match
            settings.n_sites and settings.n_inputs)
        verbose: Print progress

    Returns:
        (SensitivityField, MonitorDataset, SyntheticTruth)
    """
    field = synthetic_field(settings, substream(seed, 'synthetic', 0))

    site_rng = substream(seed, 'synthetic', 1)
    site_cells = np.sort(site_rng.choice(field.n_cells, settings.n_sites, replace=False))
    jitter = site_rng.uniform(-0.4, 0.4, (settings.n_sites, 2)) * settings.cell_km
    site_xy = field.xy[site_cells] + jitter
    site_ids = np.array([f"S{i + 1:03d}" for i in range(settings.n_sites)], dtype=object)

    if state is None:
        state = truth_state(settings, site_xy, substream(seed, 'synthetic', 2))
    state = state.copy().validate()
    if state.model.n_sites != settings.n_sites or len(state.alpha) != settings.n_inputs:
        raise InputError("truth state does not match the synthetic geometry")

    days = np.arange(settings.n_days)
    y = np.empty((settings.n_days, settings.n_sites))
    for s in range(settings.n_sites):
        C = evaluate_rfm_at(field, days, np.full(settings.n_days, site_cells[s]), state.alpha)
        y[:, s] = simulate_site_year(C, state.model, s, settings.true_phi,
                                     substream(seed, 'synthetic', 3, s))
    # ozone is non-negative
    y = np.maximum(y, 0.0)

    data = MonitorDataset(
        day=np.repeat(days, settings.n_sites),
        site=np.tile(np.arange(settings.n_sites), settings.n_days),
        y=y.ravel(),
        site_ids=site_ids, site_xy=site_xy, site_cell=field.cell_ids[site_cells],
    )
    truth = SyntheticTruth(state, settings.true_phi, settings, site_ids, site_xy, settings.n_days)
    if verbose:
        print(f"✅ Generated {len(data)} records at {settings.n_sites} sites on a "
              f"{settings.grid_nx}x{settings.grid_ny} grid ({settings.n_inputs} inputs)")
    return field, data, truth


def thinned_cells(settings):
    """Cells on every other row and column of the grid"""
    rows, cols = np.divmod(np.arange(settings.grid_nx * settings.grid_ny), settings.grid_nx)
    return np.flatnonzero((rows % 2 == 0) & (cols % 2 == 0))


def write_synthetic(directory, field, data, truth):
    """
    Write the generated triple

    Files: sensitivity.csv, sensitivity_thinned.csv, monitors.csv,
    truth.yaml, and truth/ holding the truth state in posterior format

    Returns:
        Path of the directory
    """
    directory = Path(directory)
    write_sensitivity(field, directory / 'sensitivity.csv')
    write_sensitivity(field.subset_cells(thinned_cells(truth.settings)),
                      directory / 'sensitivity_thinned.csv')
    write_monitors(data, directory / 'monitors.csv')
    write_posterior(truth.as_draws(list(field.input_names)), directory / 'truth')
    write_yaml({
        'phi': float(truth.phi),
        'alpha': [float(a) for a in truth.state.alpha],
        'xi': [float(v) for v in truth.state.model.xi],
        'gp_range': float(truth.state.gp_range),
        'settings': asdict(truth.settings),
    }, directory / 'truth.yaml')
    return directory
