"""
Tail Module
GPD mathematics and the conditional quantile model built on it
"""

from .gpd import GpdParams, gpd_quantile, gpd_density, gpd_cdf, SMALL_SHAPE
from .quantile_basis import QuantileBasis, basis_value
from .conditional_model import (
    ConditionalModelParams,
    ResolvedTail,
    covariate_row,
    threshold_level,
    tail_profile,
    conditional_quantile,
    conditional_density,
    conditional_log_density,
    conditional_cdf,
)

__all__ = [
    'GpdParams',
    'gpd_quantile',
    'gpd_density',
    'gpd_cdf',
    'SMALL_SHAPE',
    'QuantileBasis',
    'basis_value',
    'ConditionalModelParams',
    'ResolvedTail',
    'covariate_row',
    'threshold_level',
    'tail_profile',
    'conditional_quantile',
    'conditional_density',
    'conditional_log_density',
    'conditional_cdf',
]
