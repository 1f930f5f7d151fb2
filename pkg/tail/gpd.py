"""
Generalized Pareto Tail
Density, CDF and quantile of the GPD with lower bound mu, scale sigma, shape xi
"""

from dataclasses import dataclass

import numpy as np

from src.errors import InputError


# Below this |xi| the exponential limit (plus its first-order shape term) is used.
SMALL_SHAPE = 1e-6


@dataclass(frozen=True)
class GpdParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not np.all(np.asarray(self.sigma) > 0):
            raise InputError("GPD scale must be positive")

    def upper_endpoint(self):
        """Finite right end of the support when xi < 0, else inf"""
        return gpd_upper_endpoint(self.mu, self.sigma, self.xi)


def gpd_upper_endpoint(mu, sigma, xi):
    mu, sigma, xi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, sigma, xi)))
    with np.errstate(divide='ignore', invalid='ignore'):
        end = np.where(xi <= -SMALL_SHAPE, mu - sigma / np.where(xi == 0, 1.0, xi), np.inf)
    return end


def _split_shape(xi):
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < SMALL_SHAPE
    safe_xi = np.where(small, 1.0, xi)
    return small, safe_xi


def gpd_quantile_raw(p, mu, sigma, xi):
    """Vectorized GPD quantile with no argument checks (p in [0, 1])"""
    p, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, mu, sigma, xi)))
    small, safe_xi = _split_shape(xi)
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        log_tail = -np.log1p(-p)  # -log(1 - p)
        general = sigma * np.expm1(safe_xi * log_tail) / safe_xi
        limit = sigma * log_tail * (1.0 + 0.5 * xi * log_tail)
        z = np.where(small, limit, general)
        # p = 1 with a bounded tail lands exactly on the endpoint
        z = np.where((p >= 1.0) & (xi <= -SMALL_SHAPE), -sigma / safe_xi, z)
    return mu + z


def gpd_cdf(y, mu, sigma, xi):
    """
    GPD distribution function (vectorized)

    Args:
        y: Value(s) in ppb
        mu, sigma, xi: GPD parameters (broadcastable)

    Returns:
        numpy array of probabilities in [0, 1]
    """
    y, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (y, mu, sigma, xi)))
    small, safe_xi = _split_shape(xi)
    w = np.maximum(y - mu, 0.0) / sigma
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        base = 1.0 + safe_xi * w
        general = -np.expm1(-np.log1p(safe_xi * w) / safe_xi)
        limit = -np.expm1(-w + 0.5 * xi * w * w)
        out = np.where(small, limit, general)
        out = np.where(~small & (base <= 0.0), 1.0, out)
    out = np.where(y <= mu, 0.0, out)
    return np.clip(out, 0.0, 1.0)


def gpd_log_density_raw(y, mu, sigma, xi):
    """Vectorized GPD log density; -inf outside the support"""
    y, mu, sigma, xi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (y, mu, sigma, xi)))
    small, safe_xi = _split_shape(xi)
    w = (y - mu) / sigma
    with np.errstate(divide='ignore', invalid='ignore'):
        base = 1.0 + safe_xi * w
        general = -np.log(sigma) - (1.0 / safe_xi + 1.0) * np.log1p(safe_xi * w)
        limit = -np.log(sigma) - w - xi * w + 0.5 * xi * w * w
        out = np.where(small, limit, general)
        out = np.where(~small & (base <= 0.0), -np.inf, out)
    return np.where(w < 0.0, -np.inf, out)


def gpd_quantile(p, params):
    """
    GPD quantile function

    Args:
        p: Probability in [0, 1); p = 1 only for a bounded tail (xi < 0)
        params: GpdParams

    Returns:
        float or numpy array in ppb
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0.0) or np.any(p_arr > 1.0) or np.any(np.isnan(p_arr)):
        raise InputError("probability must lie in [0, 1]")
    if np.any(p_arr >= 1.0) and not params.xi <= -SMALL_SHAPE:
        raise InputError("p = 1 is only allowed when the tail is bounded (xi < 0)")
    out = gpd_quantile_raw(p_arr, params.mu, params.sigma, params.xi)
    return float(out) if out.ndim == 0 else out


def gpd_density(y, params):
    """
    GPD density, zero outside the support

    Args:
        y: Value(s) in ppb
        params: GpdParams

    Returns:
        float or numpy array (per ppb)
    """
    out = np.exp(gpd_log_density_raw(y, params.mu, params.sigma, params.xi))
    return float(out) if out.ndim == 0 else out
