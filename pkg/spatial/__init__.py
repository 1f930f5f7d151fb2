"""
Spatial Module
Gaussian-process priors and interpolation for site-varying coefficients
"""

from .gaussian_process import (
    GpHyper,
    GpHyperPrior,
    CoefficientField,
    ExponentialCorrelation,
    KrigingOperator,
    exp_correlation,
    gp_log_density,
    gp_predict,
    JITTER,
)

__all__ = [
    'GpHyper',
    'GpHyperPrior',
    'CoefficientField',
    'ExponentialCorrelation',
    'KrigingOperator',
    'exp_correlation',
    'gp_log_density',
    'gp_predict',
    'JITTER',
]
