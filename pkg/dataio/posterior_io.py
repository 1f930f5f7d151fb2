"""
Posterior Files
posterior.csv holds one row per retained draw; posterior_manifest.yaml holds
the model settings and site table needed to read the columns back
"""

from pathlib import Path

import numpy as np
import pandas as pd

from inference import CopulaParams, PosteriorDraws, PosteriorState, parameter_names
from src.errors import DataError
from tail import ConditionalModelParams, QuantileBasis

from .atomic import read_yaml, write_csv, write_yaml

POSTERIOR_FILE = 'posterior.csv'
MANIFEST_FILE = 'posterior_manifest.yaml'
COPULA_FILE = 'copula.yaml'

NAMING = {
    'alpha:<input>': 'fractional perturbation of each reduced-form input',
    '<process>:<site_id>:<j>': 'coefficient j of a site-varying process (beta, theta_l, sigma)',
    'xi:<j>, d:<j>': 'global GPD-shape and threshold-link coefficients',
    'l_thr, u_thr': 'bounds of the threshold quantile level',
    'gp_mean:<process>:<j>, gp_var:<process>:<j>': 'GP mean and variance per coefficient',
    'gp_range': 'shared spatial range (km)',
}


def state_template(basis_L, order, use_gpd, n_inputs, n_sites):
    """Zero-valued PosteriorState with the right shapes"""
    model = ConditionalModelParams.zeros(QuantileBasis(basis_L), order, n_sites, use_gpd)
    n_proc = len(model.site_process_names())
    return PosteriorState(np.zeros(n_inputs), model, np.zeros((n_proc, order + 1)),
                          np.ones((n_proc, order + 1)), 1.0)


def write_posterior(draws, directory):
    """
    Write draws and manifest into a run directory

    Args:
        draws: PosteriorDraws
        directory: Output directory

    Returns:
        Path of the posterior CSV
    """
    directory = Path(directory)
    model = draws.template.model
    manifest = {
        'basis_functions': model.basis.L,
        'poly_order': model.order,
        'use_gpd': bool(model.use_gpd),
        'input_names': list(draws.input_names),
        'processes': model.site_process_names(),
        'n_draws': len(draws),
        'sites': [{'site_id': str(sid), 'x_km': float(xy[0]), 'y_km': float(xy[1])}
                  for sid, xy in zip(draws.site_ids.tolist(), draws.site_xy)],
        'columns': NAMING,
    }
    write_yaml(manifest, directory / MANIFEST_FILE)
    return write_csv(draws.to_frame(), directory / POSTERIOR_FILE)


def read_posterior(directory, verbose=False):
    """
    Read draws written by write_posterior

    Args:
        directory: Run directory
        verbose: Print a summary line

    Returns:
        PosteriorDraws
    """
    directory = Path(directory)
    manifest = read_yaml(directory / MANIFEST_FILE)
    csv_path = directory / POSTERIOR_FILE
    if not csv_path.exists():
        raise FileNotFoundError(f"Posterior file not found: {csv_path}")
    frame = pd.read_csv(csv_path, float_precision='round_trip')
    if len(frame) != manifest.get('n_draws', len(frame)):
        raise DataError(f"{csv_path}: {len(frame)} draws, manifest lists {manifest['n_draws']}")

    sites = manifest.get('sites', [])
    site_ids = np.array([str(s['site_id']) for s in sites], dtype=object)
    site_xy = np.array([[s['x_km'], s['y_km']] for s in sites], dtype=float).reshape(-1, 2)
    input_names = list(manifest['input_names'])
    template = state_template(manifest['basis_functions'], manifest['poly_order'],
                              manifest['use_gpd'], len(input_names), len(site_ids))
    names = parameter_names(template, site_ids, input_names)
    if list(frame.columns) != names:
        raise DataError(f"{csv_path}: columns do not match the manifest layout")
    draws = PosteriorDraws(frame.to_numpy(dtype=float), names, template, site_ids, site_xy,
                           input_names)
    if verbose:
        print(f"📁 Loaded {len(draws)} posterior draws ({len(names)} parameters)")
    return draws


def write_copula(fit, path):
    return write_yaml({
        'phi': float(fit.params.phi),
        'lag1_correlation': None if not np.isfinite(fit.r_hat) else float(fit.r_hat),
        'n_pairs': int(fit.n_pairs),
        'p_value': None if not np.isfinite(fit.p_value) else float(fit.p_value),
        'independent_fallback': bool(fit.independent_fallback),
    }, path)


def read_copula(path):
    data = read_yaml(path)
    if 'phi' not in data:
        raise DataError(f"{path}: missing phi")
    return CopulaParams(float(data['phi']))
