"""
Reference Forecasts
Deterministic baselines scored next to the statistical model: the raw
reduced-form output and a per-site linear recalibration of it
"""

import numpy as np
from scipy.stats import linregress

from .scores import DEFAULT_LEVELS, DEFAULT_THRESHOLDS, deterministic_forecasts, score_forecasts


def base_concentrations(data, field):
    """Unperturbed reduced-form output C0 at each record"""
    return field.base[data.day, data.record_cells(field)]


def cmaq_baseline(test, field, levels=DEFAULT_LEVELS, thresholds=DEFAULT_THRESHOLDS,
                  label='CMAQ'):
    """Score C0 itself: qhat(tau) = C0, P(c) = I(C0 > c)"""
    quantiles, exceedance = deterministic_forecasts(base_concentrations(test, field),
                                                    levels, thresholds)
    return score_forecasts(test.y, quantiles, exceedance, label)


def fit_site_regressions(train, field):
    """
    Per-site least squares y = a(s) + b(s) * C0

    Sites with fewer than two training records or constant C0 fall back to
    intercept-only; sites without training records take the pooled fit.

    Returns:
        (intercepts, slopes, flags) with one entry per site
    """
    C0 = base_concentrations(train, field)
    y = train.y
    if len(y) >= 2 and np.ptp(C0) > 0:
        pooled = linregress(C0, y)
        pooled_fit = (pooled.intercept, pooled.slope)
    else:
        pooled_fit = (float(np.mean(y)) if len(y) else 0.0, 0.0)

    intercepts = np.empty(train.n_sites)
    slopes = np.empty(train.n_sites)
    flags = {}
    for s, rows in enumerate(train.site_rows()):
        if len(rows) >= 2 and np.ptp(C0[rows]) > 0:
            fit = linregress(C0[rows], y[rows])
            intercepts[s], slopes[s] = fit.intercept, fit.slope
        elif len(rows) >= 1:
            intercepts[s], slopes[s] = float(np.mean(y[rows])), 0.0
            flags[s] = f"site {train.site_ids[s]}: intercept-only ({len(rows)} record(s))"
        else:
            intercepts[s], slopes[s] = pooled_fit
            flags[s] = f"site {train.site_ids[s]}: no training records, pooled fit"
    return intercepts, slopes, flags


def slr_baseline(train, test, field, levels=DEFAULT_LEVELS, thresholds=DEFAULT_THRESHOLDS,
                 label='SLR'):
    """
    Score the per-site linear recalibration of C0 as a deterministic forecast

    Args:
        train: MonitorDataset used to fit a(s), b(s)
        test: MonitorDataset scored (same site table as train)
        field: SensitivityField
        levels: Quantile levels
        thresholds: Exceedance thresholds, ppb
        label: Column label

    Returns:
        ScoreReport whose flags list the fallback sites seen in the test set
    """
    intercepts, slopes, flags = fit_site_regressions(train, field)
    fitted = intercepts[test.site] + slopes[test.site] * base_concentrations(test, field)
    quantiles, exceedance = deterministic_forecasts(fitted, levels, thresholds)
    seen = sorted(set(test.site.tolist()) & set(flags))
    return score_forecasts(test.y, quantiles, exceedance, label, [flags[s] for s in seen])
