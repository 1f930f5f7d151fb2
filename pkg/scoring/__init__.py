"""
Scoring Module
Holdout scores for the conditional model and its deterministic baselines
"""

from .scores import (
    DEFAULT_LEVELS,
    DEFAULT_THRESHOLDS,
    ScoreReport,
    quantile_score,
    brier_score,
    score_forecasts,
    score_model,
    score_table,
    split_train_test,
)
from .baselines import cmaq_baseline, slr_baseline, fit_site_regressions

__all__ = [
    'DEFAULT_LEVELS',
    'DEFAULT_THRESHOLDS',
    'ScoreReport',
    'quantile_score',
    'brier_score',
    'score_forecasts',
    'score_model',
    'score_table',
    'split_train_test',
    'cmaq_baseline',
    'slr_baseline',
    'fit_site_regressions',
]
