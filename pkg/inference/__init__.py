"""
Inference Module
Stage-one MCMC calibration and stage-two copula fitting
"""

from .dataset import MonitorDataset
from .likelihood import LikelihoodContext, log_likelihood
from .posterior import (
    PosteriorState,
    PosteriorDraws,
    parameter_names,
    flatten_state,
    unflatten_state,
    summarize_draws,
)
from .sampler import (
    McmcConfig,
    ParameterBlock,
    MetropolisSampler,
    ChainResult,
    mh_step,
    initial_state,
    run_chain,
)
from .copula import (
    CopulaParams,
    CopulaFit,
    ar1_latent,
    fit_copula,
    frechet_transform,
    lag_pairs,
    residual_table,
)

__all__ = [
    'MonitorDataset',
    'LikelihoodContext',
    'log_likelihood',
    'PosteriorState',
    'PosteriorDraws',
    'parameter_names',
    'flatten_state',
    'unflatten_state',
    'summarize_draws',
    'McmcConfig',
    'ParameterBlock',
    'MetropolisSampler',
    'ChainResult',
    'mh_step',
    'initial_state',
    'run_chain',
    'CopulaParams',
    'CopulaFit',
    'ar1_latent',
    'fit_copula',
    'frechet_transform',
    'lag_pairs',
    'residual_table',
]
