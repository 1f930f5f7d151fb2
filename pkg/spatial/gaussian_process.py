"""
Spatial Gaussian Processes
Exponential-correlation GP priors for spatially varying coefficients and
kriging-style interpolation from monitor sites to grid cells
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from src.errors import InputError, NumericalError


# Added to correlation diagonals (i.e. 1e-8 * variance on covariances).
JITTER = 1e-8
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GpHyper:
    mean: float
    variance: float
    range: float

    def __post_init__(self):
        if not self.variance > 0:
            raise InputError(f"GP variance must be positive, got {self.variance}")
        if not self.range > 0:
            raise InputError(f"GP range must be positive, got {self.range}")


def exp_correlation(sites_a, sites_b, rho):
    """
    Exponential correlation exp(-||s - s'|| / rho)

    Args:
        sites_a: (n_a, 2) coordinates in km
        sites_b: (n_b, 2) coordinates in km
        rho: Range in km (> 0)

    Returns:
        numpy array (n_a, n_b)
    """
    if not rho > 0:
        raise InputError(f"spatial range must be positive, got {rho}")
    a = np.asarray(sites_a, dtype=float).reshape(-1, 2)
    b = np.asarray(sites_b, dtype=float).reshape(-1, 2)
    return np.exp(-cdist(a, b) / rho)


class ExponentialCorrelation:
    def __init__(self, sites, rho, jitter=JITTER):
        """
        Jittered correlation matrix of a site set with its Cholesky factor

        Args:
            sites: (n, 2) coordinates in km
            rho: Range in km
            jitter: Added to the diagonal before factorizing
        """
        self.sites = np.asarray(sites, dtype=float).reshape(-1, 2)
        self.rho = float(rho)
        self.jitter = jitter
        self.matrix = exp_correlation(self.sites, self.sites, rho)
        jittered = self.matrix + jitter * np.eye(len(self.sites))
        try:
            self.factor = linalg.cho_factor(jittered, lower=True)
        except linalg.LinAlgError as e:
            raise NumericalError(f"Cholesky failed for rho={rho:.4g}: {e}") from e
        self.log_det = 2.0 * np.sum(np.log(np.diag(self.factor[0])))
        self._precision = None

    def __len__(self):
        return self.sites.shape[0]

    def solve(self, rhs):
        return linalg.cho_solve(self.factor, rhs)

    @property
    def precision(self):
        """Inverse of the jittered correlation matrix"""
        if self._precision is None:
            self._precision = self.solve(np.eye(len(self)))
        return self._precision

    def quadratic_form(self, resid):
        resid = np.asarray(resid, dtype=float)
        return float(resid @ self.solve(resid))


def gp_log_density(values, hyper, sites, correlation=None):
    """
    Multivariate normal log density of one coefficient process

    Args:
        values: Process value per site, shape (n,)
        hyper: GpHyper (mean, variance, range)
        sites: (n, 2) coordinates in km
        correlation: Optional ExponentialCorrelation for (sites, hyper.range)

    Returns:
        float
    """
    values = np.asarray(values, dtype=float).ravel()
    if correlation is None:
        correlation = ExponentialCorrelation(sites, hyper.range)
    n = values.shape[0]
    resid = values - hyper.mean
    return float(-0.5 * (n * _LOG_2PI + n * np.log(hyper.variance) + correlation.log_det
                         + correlation.quadratic_form(resid) / hyper.variance))


class KrigingOperator:
    def __init__(self, sites, new_sites, rho, jitter=JITTER):
        """
        Precomputed conditional-Gaussian map from observed sites to new sites

        Args:
            sites: (n, 2) observed coordinates in km
            new_sites: (m, 2) prediction coordinates in km
            rho: Shared range in km
            jitter: Diagonal stabilization (relative to variance)
        """
        self.observed = ExponentialCorrelation(sites, rho, jitter)
        cross = exp_correlation(new_sites, sites, rho)            # (m, n)
        self.weights = self.observed.solve(cross.T).T             # R21 R11^-1
        cond = exp_correlation(new_sites, new_sites, rho) - self.weights @ cross.T
        self.conditional_correlation = 0.5 * (cond + cond.T)
        try:
            self.conditional_factor = linalg.cholesky(
                self.conditional_correlation + jitter * np.eye(cond.shape[0]), lower=True)
        except linalg.LinAlgError as e:
            raise NumericalError(f"conditional covariance is not positive definite: {e}") from e

    def conditional(self, observed_values, hyper):
        """Conditional mean (m,) and covariance (m, m) given observed values"""
        observed_values = np.asarray(observed_values, dtype=float)
        mean = hyper.mean + self.weights @ (observed_values - hyper.mean)
        return mean, hyper.variance * self.conditional_correlation

    def sample(self, observed_values, hyper, rng):
        observed_values = np.asarray(observed_values, dtype=float)
        mean = hyper.mean + self.weights @ (observed_values - hyper.mean)
        eps = rng.standard_normal(mean.shape[0])
        return mean + np.sqrt(hyper.variance) * (self.conditional_factor @ eps)


def gp_predict(observed, hyper, sites, new_sites, rng, operator=None):
    """
    Draw process values at new sites from the GP posterior predictive

    Args:
        observed: Process values at the observed sites, shape (n,)
        hyper: GpHyper
        sites: (n, 2) observed coordinates in km
        new_sites: (m, 2) prediction coordinates in km
        rng: numpy Generator (draw is deterministic given its state)
        operator: Optional KrigingOperator reused across processes sharing rho

    Returns:
        numpy array (m,)
    """
    if operator is None:
        operator = KrigingOperator(sites, new_sites, hyper.range)
    return operator.sample(observed, hyper, rng)


@dataclass(frozen=True)
class GpHyperPrior:
    """
    Hyperpriors shared by every coefficient process

    mean ~ N(0, c1^2), variance ~ Gamma(shape=c2, rate=c3),
    log(range) ~ N(0, log_range_variance)
    """
    c1: float = 100.0
    c2: float = 0.1
    c3: float = 0.1
    log_range_variance: float = 10.0

    def log_prior_mean(self, mean):
        return float(np.sum(-0.5 * (np.asarray(mean) / self.c1) ** 2))

    def log_prior_variance(self, variance):
        variance = np.asarray(variance, dtype=float)
        if np.any(variance <= 0):
            return -np.inf
        return float(np.sum((self.c2 - 1.0) * np.log(variance) - self.c3 * variance))

    def log_prior_log_range(self, log_range):
        return float(-0.5 * log_range * log_range / self.log_range_variance)


@dataclass
class CoefficientField:
    """
    One spatially varying process at the monitor sites

    values[s, j] is coefficient j of the process at site s.
    """
    name: str
    sites: np.ndarray   # (n_sites, 2) km
    values: np.ndarray  # (n_sites, M + 1)

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=float).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=float).reshape(self.sites.shape[0], -1)

    def interpolate(self, hypers, new_sites, rng, operator=None):
        """
        Draw the process at new sites, one GP draw per coefficient

        Args:
            hypers: Sequence of GpHyper, one per coefficient column
            new_sites: (m, 2) km
            rng: numpy Generator
            operator: Optional KrigingOperator sharing the range of `hypers`

        Returns:
            numpy array (m, M + 1)
        """
        if operator is None:
            operator = KrigingOperator(self.sites, new_sites, hypers[0].range)
        columns = [gp_predict(self.values[:, j], hyper, self.sites, new_sites, rng, operator)
                   for j, hyper in enumerate(hypers)]
        return np.stack(columns, axis=1)
