"""
Gaussian Copula
Stage-two residual transformation, AR(1) temporal range estimation and the
latent AR(1) series used in simulation
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.signal import lfilter
from scipy.special import log_ndtr, ndtri
from scipy.stats import pearsonr

from rfm import evaluate_rfm_at
from src.errors import InputError
from tail import conditional_cdf
from tail.quantile_basis import clamp_tau

# Range used when the lag-1 correlation is not positive; exp(-1/phi) is 0.
INDEPENDENT_PHI = 1e-3


@dataclass(frozen=True)
class CopulaParams:
    phi: float

    def __post_init__(self):
        if not self.phi > 0:
            raise InputError(f"temporal range phi must be positive, got {self.phi}")

    @property
    def lag1(self):
        return lag_correlation(1, self.phi)


def lag_correlation(h, phi):
    """exp(-h / phi)"""
    return float(np.exp(-h / phi))


def phi_from_correlation(r):
    """Invert r = exp(-1/phi); None when r is not in (0, 1)"""
    if not 0.0 < r < 1.0:
        return None
    return float(-1.0 / np.log(r))


def ar1_latent(n_days, phi, rng, size=()):
    """
    Zero-mean, unit-variance AR(1) series with lag-h correlation exp(-h/phi)

    Args:
        n_days: Series length
        phi: Temporal range in days (> 0)
        rng: numpy Generator
        size: Leading shape (tuple) for independent series

    Returns:
        numpy array size + (n_days,)
    """
    r = lag_correlation(1, phi)
    eps = rng.standard_normal(tuple(size) + (n_days,))
    if r == 0.0:
        return eps
    innov = eps * np.sqrt(1.0 - r * r)
    innov[..., 0] = eps[..., 0]
    return lfilter([1.0], [1.0, -r], innov, axis=-1)


def frechet_transform(z):
    """
    Map standard-normal scores to unit-Frechet margins: -1 / log(Phi(z))

    Args:
        z: Scalar or array

    Returns:
        Same shape; +inf as z -> +inf, 0 as z -> -inf
    """
    log_p = log_ndtr(np.asarray(z, dtype=float))
    with np.errstate(divide='ignore'):
        out = np.where(log_p < 0.0, -1.0 / np.where(log_p < 0.0, log_p, -1.0), np.inf)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class CopulaFit:
    params: CopulaParams
    r_hat: float
    n_pairs: int
    p_value: float
    independent_fallback: bool
    residuals: pd.DataFrame


def residual_table(state, data, field):
    """
    Normal scores z = Phi^-1(F(y | C, s)) of every record at a parameter state

    Returns:
        pandas DataFrame with day, site_id, y, c_rfm, u, z, frechet
    """
    C = evaluate_rfm_at(field, data.day, data.record_cells(field), state.alpha)
    u = conditional_cdf(data.y, state.model.resolve(C, data.site)) if len(data) else np.zeros(0)
    z = ndtri(clamp_tau(u))
    return pd.DataFrame({
        'day': data.day,
        'site_id': data.site_ids[data.site],
        'y': data.y,
        'c_rfm': C,
        'u': u,
        'z': z,
        'frechet': frechet_transform(z),
    })


def lag_pairs(residuals):
    """
    Same-site residual pairs on consecutive days

    Returns:
        pandas DataFrame with site_id, day (the later day), z_prev, z, and the
        Frechet transforms frechet_prev, frechet
    """
    ordered = residuals.sort_values(['site_id', 'day'], kind='stable')
    prev = ordered.groupby('site_id', sort=False).shift(1)
    consecutive = (ordered['day'] - prev['day']) == 1
    pairs = pd.DataFrame({
        'site_id': ordered['site_id'],
        'day': ordered['day'],
        'z_prev': prev['z'],
        'z': ordered['z'],
        'frechet_prev': prev['frechet'],
        'frechet': ordered['frechet'],
    })
    return pairs[consecutive.to_numpy()].reset_index(drop=True)


def fit_copula(state, data, field, verbose=False):
    """
    Match the AR(1) range to the lag-1 correlation of normal-score residuals

    Residuals are taken as spatially independent. A non-positive correlation
    leaves phi undefined; the fit then falls back to independence and flags it.

    Args:
        state: PosteriorState (the posterior mean)
        data: MonitorDataset
        field: SensitivityField
        verbose: Print the estimate

    Returns:
        CopulaFit
    """
    residuals = residual_table(state, data, field)
    pairs = lag_pairs(residuals)
    n_pairs = len(pairs)
    r_hat, p_value = np.nan, np.nan
    if n_pairs >= 3 and pairs['z'].std() > 0 and pairs['z_prev'].std() > 0:
        r_hat, p_value = pearsonr(pairs['z_prev'], pairs['z'])
        r_hat, p_value = float(r_hat), float(p_value)

    phi = phi_from_correlation(r_hat) if np.isfinite(r_hat) else None
    fallback = phi is None
    if fallback:
        phi = INDEPENDENT_PHI
        if verbose:
            print(f"⚠️  Lag-1 residual correlation {r_hat:.3f} is not positive; "
                  f"using independent days (phi={phi:g})")
    elif verbose:
        print(f"📊 Lag-1 residual correlation {r_hat:.3f} over {n_pairs} pairs -> phi={phi:.3f} days")
    return CopulaFit(CopulaParams(phi), r_hat, n_pairs, p_value, fallback, residuals)
