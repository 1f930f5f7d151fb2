"""
Conditional Tail Model
Distribution of a monitor value given reduced-form output: a semiparametric
quantile body spliced to a GPD tail at a covariate-dependent threshold level
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit, ndtr, ndtri

from src.errors import InputError
from .gpd import SMALL_SHAPE, gpd_cdf, gpd_log_density_raw, gpd_quantile_raw
from .quantile_basis import QuantileBasis, clamp_tau

# Standardization of reduced-form output: Cbar = (C - 50) / 15
COVARIATE_CENTER = 50.0
COVARIATE_SCALE = 15.0

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def covariate_row(C, M):
    """
    Polynomial covariates of standardized reduced-form output

    Args:
        C: Concentration(s) in ppb, scalar or array
        M: Polynomial order (>= 1)

    Returns:
        numpy array (..., M + 1): (1, Cbar, ..., Cbar^M)
    """
    if M < 1:
        raise InputError(f"polynomial order must be >= 1, got {M}")
    cbar = (np.asarray(C, dtype=float) - COVARIATE_CENTER) / COVARIATE_SCALE
    return cbar[..., None] ** np.arange(M + 1)


@dataclass
class ConditionalModelParams:
    """
    Coefficient vectors of every conditional-distribution parameter

    Site-varying processes (beta, theta_l, sigma) are (n_sites, M + 1) arrays;
    xi and d are global (M + 1,) vectors. theta is stored as
    (n_sites, L, M + 1) so process views stay writable.
    """
    basis: QuantileBasis
    order: int
    beta: np.ndarray
    theta: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    d: np.ndarray
    l_thr: float = 0.85
    u_thr: float = 0.95
    use_gpd: bool = True

    def __post_init__(self):
        m1 = self.order + 1
        self.beta = np.asarray(self.beta, dtype=float).reshape(-1, m1)
        n_sites = self.beta.shape[0]
        self.theta = np.asarray(self.theta, dtype=float).reshape(n_sites, self.basis.L, m1)
        self.sigma = np.asarray(self.sigma, dtype=float).reshape(n_sites, m1)
        self.xi = np.asarray(self.xi, dtype=float).reshape(m1)
        self.d = np.asarray(self.d, dtype=float).reshape(m1)
        if not 0.8 <= self.l_thr <= self.u_thr <= 1.0:
            raise InputError(
                f"threshold bounds need 0.8 <= l <= u <= 1, got l={self.l_thr}, u={self.u_thr}")

    @classmethod
    def zeros(cls, basis, order, n_sites, use_gpd=True):
        m1 = order + 1
        return cls(
            basis=basis, order=order,
            beta=np.zeros((n_sites, m1)),
            theta=np.zeros((n_sites, basis.L, m1)),
            sigma=np.zeros((n_sites, m1)),
            xi=np.zeros(m1), d=np.zeros(m1),
            use_gpd=use_gpd,
        )

    @property
    def n_sites(self):
        return self.beta.shape[0]

    def site_process_names(self):
        """Names of the spatially varying processes, in scan order"""
        names = ['beta'] + [f'theta_{l + 1}' for l in range(self.basis.L)]
        if self.use_gpd:
            names.append('sigma')
        return names

    def process(self, name):
        """Writable (n_sites, M + 1) view of a site-varying process"""
        if name == 'beta':
            return self.beta
        if name == 'sigma':
            return self.sigma
        if name.startswith('theta_'):
            return self.theta[:, int(name.split('_')[1]) - 1, :]
        raise KeyError(f"unknown process '{name}'")

    def copy(self):
        return ConditionalModelParams(
            basis=self.basis, order=self.order,
            beta=self.beta.copy(), theta=self.theta.copy(), sigma=self.sigma.copy(),
            xi=self.xi.copy(), d=self.d.copy(),
            l_thr=self.l_thr, u_thr=self.u_thr, use_gpd=self.use_gpd,
        )

    def resolve(self, C, sites):
        """
        Evaluate every parameter at (C, site) pairs

        Args:
            C: Reduced-form concentrations, shape (n,)
            sites: Site index per value, shape (n,)

        Returns:
            ResolvedTail
        """
        C = np.atleast_1d(np.asarray(C, dtype=float))
        sites = np.broadcast_to(np.asarray(sites, dtype=int), C.shape)
        X = covariate_row(C, self.order)
        beta = np.einsum('nm,nm->n', X, self.beta[sites])
        theta = np.exp(np.einsum('nm,nlm->nl', X, self.theta[sites]))
        if self.use_gpd:
            sigma = np.exp(np.einsum('nm,nm->n', X, self.sigma[sites]))
            xi = X @ self.xi
            threshold = _threshold_from_link(X @ self.d, self.l_thr, self.u_thr)
        else:
            sigma = np.ones_like(C)
            xi = np.zeros_like(C)
            threshold = np.ones_like(C)
        return ResolvedTail(self.basis, beta, theta, threshold, sigma, xi)


def _threshold_from_link(d, l_thr, u_thr):
    w = expit(d)
    return l_thr * w + u_thr * (1.0 - w)


def threshold_level(C, params):
    """
    Quantile level T(C) where the GPD tail takes over

    Args:
        C: Concentration(s) in ppb
        params: ConditionalModelParams

    Returns:
        T in [l_thr, u_thr] (1.0 for models without a GPD tail)
    """
    if params.use_gpd:
        X = covariate_row(C, params.order)
        out = _threshold_from_link(X @ params.d, params.l_thr, params.u_thr)
    else:
        out = np.ones_like(np.asarray(C, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def tail_profile(params, C_grid):
    """
    Threshold level, shape and site-averaged scale along a grid of C values

    Args:
        params: ConditionalModelParams
        C_grid: Concentrations in ppb

    Returns:
        dict of arrays: c_ppb, threshold, xi, sigma_mean, mu_mean
    """
    C_grid = np.atleast_1d(np.asarray(C_grid, dtype=float))
    n_sites = params.n_sites
    C = np.repeat(C_grid, n_sites)
    resolved = params.resolve(C, np.tile(np.arange(n_sites), len(C_grid)))
    shape = (len(C_grid), n_sites)
    mu = resolved.mu.reshape(shape)
    return {
        'c_ppb': C_grid,
        'threshold': np.atleast_1d(threshold_level(C_grid, params)),
        'xi': resolved.xi.reshape(shape)[:, 0],
        'sigma_mean': resolved.sigma.reshape(shape).mean(axis=1),
        'mu_mean': mu.mean(axis=1) if params.use_gpd else np.full(len(C_grid), np.nan),
    }


@dataclass
class ResolvedTail:
    """Conditional-distribution parameters evaluated at n (C, site) pairs"""
    basis: QuantileBasis
    beta: np.ndarray        # (n,)
    theta: np.ndarray       # (n, L)
    threshold: np.ndarray   # (n,)
    sigma: np.ndarray       # (n,)
    xi: np.ndarray          # (n,)

    def __post_init__(self):
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        n = self.beta.shape[0]
        self.theta = np.asarray(self.theta, dtype=float).reshape(n, self.basis.L)
        self.threshold = np.broadcast_to(np.asarray(self.threshold, dtype=float), (n,)).copy()
        self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (n,)).copy()
        self.xi = np.broadcast_to(np.asarray(self.xi, dtype=float), (n,)).copy()

    def __len__(self):
        return self.beta.shape[0]

    def take(self, rows):
        """Subset of rows as a new ResolvedTail"""
        return ResolvedTail(self.basis, self.beta[rows], self.theta[rows],
                            self.threshold[rows], self.sigma[rows], self.xi[rows])

    @property
    def has_tail(self):
        return self.threshold < 1.0

    def body_quantile(self, tau):
        """q0(tau) = beta + sum_l B_l(tau) theta_l"""
        tau = np.broadcast_to(np.asarray(tau, dtype=float), self.beta.shape)
        return self.beta + np.einsum('nl,nl->n', self.basis.values(tau), self.theta)

    @cached_property
    def mu(self):
        """GPD lower bound q0(T); +inf where there is no tail"""
        mu = self.body_quantile(np.where(self.has_tail, self.threshold, 0.5))
        return np.where(self.has_tail, mu, np.inf)

    @cached_property
    def knot_quantiles(self):
        """(n, L + 1) body quantiles at the knots, outer knots at -inf / +inf"""
        L = self.basis.L
        n = len(self)
        q = np.empty((n, L + 1))
        q[:, 0] = -np.inf
        q[:, L] = np.inf
        for m in range(1, L):
            q[:, m] = self.body_quantile(np.full(n, self.basis.knots[m]))
        return q

    @cached_property
    def segment_means(self):
        """(n, L) location a_l of the normal piece on each knot segment"""
        L = self.basis.L
        if L == 1:
            return self.beta[:, None].copy()
        knots = self.basis.knots
        lower = self.basis.lower_half
        anchor = np.where(lower, np.arange(1, L + 1), np.arange(0, L))
        z_anchor = ndtri(clamp_tau(knots[anchor]))
        return self.knot_quantiles[:, anchor] - self.theta * z_anchor

    def segment_for_value(self, y):
        """Zero-based segment l with q0(kappa_l) <= y < q0(kappa_{l+1})"""
        interior = self.knot_quantiles[:, 1:-1]
        return np.sum(interior <= np.asarray(y, dtype=float)[:, None], axis=1)


def _check_levels(tau, site_params):
    tau = np.broadcast_to(np.asarray(tau, dtype=float), site_params.beta.shape)
    if np.any(np.isnan(tau)) or np.any(tau <= 0.0) or np.any(tau > 1.0):
        raise InputError("quantile level must lie in (0, 1)")
    bounded = site_params.has_tail & (site_params.xi <= -SMALL_SHAPE)
    if np.any((tau >= 1.0) & ~bounded):
        raise InputError("tau = 1 is only allowed with a bounded GPD tail (xi < 0)")
    return tau


def conditional_quantile(tau, site_params):
    """
    Conditional quantile q(tau | C, s)

    Args:
        tau: Level(s) in (0, 1); broadcast against the resolved rows
        site_params: ResolvedTail

    Returns:
        numpy array (n,) in ppb
    """
    tau = _check_levels(tau, site_params)
    T = site_params.threshold
    in_tail = site_params.has_tail & (tau > T)
    body = site_params.body_quantile(np.where(in_tail, T, tau))
    if not np.any(in_tail):
        return body
    with np.errstate(divide='ignore', invalid='ignore'):
        rel = np.where(in_tail, (tau - T) / (1.0 - T), 0.0)
    tail = gpd_quantile_raw(rel, site_params.mu, site_params.sigma, site_params.xi)
    return np.where(in_tail, tail, body)


def conditional_log_density(y, site_params):
    """
    Log of the closed-form conditional density (split normal body, GPD tail)

    Args:
        y: Observation(s) in ppb, shape (n,) or scalar
        site_params: ResolvedTail

    Returns:
        numpy array (n,); -inf where the density is zero
    """
    y = np.broadcast_to(np.asarray(y, dtype=float), site_params.beta.shape)
    mu = site_params.mu
    below = y < mu
    seg = site_params.segment_for_value(y)
    rows = np.arange(len(site_params))
    a = site_params.segment_means[rows, seg]
    th = site_params.theta[rows, seg]
    z = (y - a) / th
    body = -0.5 * z * z - np.log(th) - _LOG_SQRT_2PI
    if not np.any(~below):
        return body
    with np.errstate(divide='ignore'):
        tail = np.log1p(-site_params.threshold) + gpd_log_density_raw(
            y, np.where(below, y, mu), site_params.sigma, site_params.xi)
    return np.where(below, body, tail)


def conditional_density(y, site_params):
    """Conditional density p(y | C, s); see conditional_log_density"""
    return np.exp(conditional_log_density(y, site_params))


def conditional_cdf(y, site_params):
    """
    Conditional distribution function, exact inverse of conditional_quantile

    Args:
        y: Observation(s) in ppb
        site_params: ResolvedTail

    Returns:
        numpy array (n,) of probabilities
    """
    y = np.broadcast_to(np.asarray(y, dtype=float), site_params.beta.shape)
    mu = site_params.mu
    below = y < mu
    seg = site_params.segment_for_value(y)
    rows = np.arange(len(site_params))
    a = site_params.segment_means[rows, seg]
    th = site_params.theta[rows, seg]
    body = ndtr((y - a) / th)
    if not np.any(~below):
        return body
    T = site_params.threshold
    tail = T + (1.0 - T) * gpd_cdf(y, np.where(below, y, mu), site_params.sigma, site_params.xi)
    return np.where(below, body, tail)
