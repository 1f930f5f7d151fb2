"""
Forecast Scores
Quantile (pinball) and Brier scores, the random holdout split, and scoring
of a fitted conditional model on held-out records
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import pandas as pd

from rfm import evaluate_rfm_at
from src.errors import InputError
from src.seeding import substream
from tail import conditional_cdf, conditional_quantile

DEFAULT_LEVELS = (0.75, 0.95, 0.99, 0.995)
DEFAULT_THRESHOLDS = (70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 100.0)
BRIER_SCALE = 100.0


def quantile_score(y, qhat, tau):
    """
    Quantile score 2 * (I[y < qhat] - tau) * (qhat - y)

    Args:
        y: Observation(s), ppb
        qhat: Forecast tau-quantile(s), ppb
        tau: Level in (0, 1)

    Returns:
        float or array, >= 0
    """
    if not 0.0 < tau < 1.0:
        raise InputError(f"quantile level must lie in (0, 1), got {tau}")
    y = np.asarray(y, dtype=float)
    qhat = np.asarray(qhat, dtype=float)
    out = 2.0 * ((y < qhat).astype(float) - tau) * (qhat - y)
    return float(out) if np.ndim(out) == 0 else out


def brier_score(y, p_exceed, c):
    """
    Brier score (I[y > c] - P(c))^2

    Args:
        y: Observation(s), ppb
        p_exceed: Forecast probability of exceeding c
        c: Threshold, ppb

    Returns:
        float or array in [0, 1]
    """
    p = np.asarray(p_exceed, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise InputError("exceedance probability must lie in [0, 1]")
    out = ((np.asarray(y, dtype=float) > c).astype(float) - p) ** 2
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ScoreReport:
    """Mean scores of one model over a test set (Brier scores x100)"""
    label: str
    quantile_scores: dict
    brier_scores: dict
    n_test: int
    flags: list = dc_field(default_factory=list)

    def to_series(self):
        entries = {f"QS tau={tau:g}": v for tau, v in self.quantile_scores.items()}
        entries.update({f"BS c={c:g}": v for c, v in self.brier_scores.items()})
        return pd.Series(entries, name=self.label)


def score_forecasts(y, quantiles, exceedance, label, flags=None):
    """
    Average scores of given forecasts

    Args:
        y: Test observations (n,)
        quantiles: {tau: forecast quantiles (n,)}
        exceedance: {c: forecast exceedance probabilities (n,)}
        label: Model label
        flags: Notes carried into the report

    Returns:
        ScoreReport
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise InputError("test set is empty")
    qs = {tau: float(np.mean(quantile_score(y, q, tau))) for tau, q in quantiles.items()}
    bs = {c: BRIER_SCALE * float(np.mean(brier_score(y, p, c))) for c, p in exceedance.items()}
    return ScoreReport(label, qs, bs, int(y.size), list(flags or []))


def deterministic_forecasts(point, levels, thresholds):
    """Point forecast used as every quantile, exceedance as its indicator"""
    point = np.asarray(point, dtype=float)
    return ({tau: point for tau in levels},
            {c: (point > c).astype(float) for c in thresholds})


def score_model(state, test, field, levels=DEFAULT_LEVELS, thresholds=DEFAULT_THRESHOLDS,
                label='model'):
    """
    Plug-in predictive scores of a parameter state on held-out records

    Args:
        state: PosteriorState (the posterior mean)
        test: MonitorDataset
        field: SensitivityField
        levels: Quantile levels
        thresholds: Exceedance thresholds, ppb
        label: Column label in the report

    Returns:
        ScoreReport
    """
    C = evaluate_rfm_at(field, test.day, test.record_cells(field), state.alpha)
    resolved = state.model.resolve(C, test.site)
    n = len(test)
    quantiles = {tau: conditional_quantile(np.full(n, tau), resolved) for tau in levels}
    exceedance = {c: np.clip(1.0 - conditional_cdf(np.full(n, c), resolved), 0.0, 1.0)
                  for c in thresholds}
    return score_forecasts(test.y, quantiles, exceedance, label)


def score_table(reports):
    """
    Side-by-side report: one row per level/threshold, one column per model

    Args:
        reports: Iterable of ScoreReport

    Returns:
        pandas DataFrame indexed by metric
    """
    table = pd.concat([r.to_series() for r in reports], axis=1)
    table.index.name = 'metric'
    return table


def split_train_test(data, fraction=0.5, seed=0):
    """
    Random record-level split

    Args:
        data: MonitorDataset
        fraction: Share of records in the training set, in (0, 1)
        seed: Master seed (uses the 'split' substream)

    Returns:
        (train, test) MonitorDatasets; rows keep their original order
    """
    if not 0.0 < fraction < 1.0:
        raise InputError(f"train fraction must lie in (0, 1), got {fraction}")
    n = len(data)
    order = substream(seed, 'split').permutation(n)
    n_train = int(np.floor(fraction * n + 0.5))
    train_rows = np.sort(order[:n_train])
    test_rows = np.sort(order[n_train:])
    return data.subset(train_rows), data.subset(test_rows)
