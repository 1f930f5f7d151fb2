"""
Quantile Basis
Monotone piecewise basis functions for the semiparametric body of the
conditional quantile function
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from src.errors import InputError


# Quantile levels are clamped to [TAU_EPS, 1 - TAU_EPS] before the normal
# quantile so that the outermost knots (0 and 1) never produce infinities.
TAU_EPS = 1e-12


def clamp_tau(tau):
    return np.clip(np.asarray(tau, dtype=float), TAU_EPS, 1.0 - TAU_EPS)


@dataclass(frozen=True)
class QuantileBasis:
    """
    L equally spaced knots on [0, 1]; L = 1 is the Gaussian basis
    B_1(tau) = Phi^-1(tau), otherwise L must be even.
    """
    L: int

    def __post_init__(self):
        if self.L < 1 or (self.L > 1 and self.L % 2 != 0):
            raise InputError(f"basis count L must be 1 or an even integer >= 2, got {self.L}")

    @property
    def knots(self):
        return np.linspace(0.0, 1.0, self.L + 1)

    @property
    def lower_half(self):
        """Boolean mask over l = 1..L: True where kappa_l < 0.5"""
        return self.knots[:-1] < 0.5

    def values(self, tau):
        """
        All basis values at once

        Args:
            tau: Quantile level(s), any shape

        Returns:
            numpy array of shape tau.shape + (L,)
        """
        tau = clamp_tau(tau)[..., None]
        z = ndtri(tau)
        if self.L == 1:
            return z
        k = self.knots
        z_lo = ndtri(clamp_tau(k[:-1]))   # Phi^-1(kappa_l)
        z_hi = ndtri(clamp_tau(k[1:]))    # Phi^-1(kappa_{l+1})
        lo, hi = k[:-1], k[1:]
        below = tau < lo
        inside = (tau >= lo) & (tau < hi)
        lower = np.where(below, z_lo - z_hi, np.where(inside, z - z_hi, 0.0))
        upper = np.where(below, 0.0, np.where(inside, z - z_lo, z_hi - z_lo))
        return np.where(self.lower_half, lower, upper)


def basis_value(tau, l, basis):
    """
    Single basis function value

    Args:
        tau: Quantile level in (0, 1) (clamped)
        l: Basis index, 1-based
        basis: QuantileBasis

    Returns:
        float
    """
    if not 1 <= l <= basis.L:
        raise InputError(f"basis index must be in 1..{basis.L}, got {l}")
    return float(basis.values(tau)[..., l - 1])
