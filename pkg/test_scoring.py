"""
Test Scoring
Quantile and Brier scores, the holdout split and the baselines
"""

import numpy as np
import pytest

from inference import MonitorDataset
from scoring import (
    brier_score,
    cmaq_baseline,
    fit_site_regressions,
    quantile_score,
    score_forecasts,
    score_model,
    score_table,
    slr_baseline,
    split_train_test,
)
from src.errors import InputError


def small_dataset(n=7):
    return MonitorDataset(np.arange(n), np.zeros(n, int), np.linspace(40.0, 70.0, n),
                          np.array(['m1']), [[0.0, 0.0]], np.array(['c']))


def test_quantile_score_examples():
    assert quantile_score(10.0, 12.0, 0.9) == pytest.approx(0.4)
    assert quantile_score(14.0, 12.0, 0.9) == pytest.approx(3.6)
    assert quantile_score(12.0, 12.0, 0.9) == 0.0
    with pytest.raises(InputError):
        quantile_score(1.0, 1.0, 1.0)


def test_brier_score():
    np.testing.assert_allclose(brier_score([80.0, 60.0], [0.7, 0.7], 75.0), [0.09, 0.49])
    with pytest.raises(InputError):
        brier_score(80.0, 1.2, 75.0)
    with pytest.raises(InputError):
        brier_score(80.0, np.nan, 75.0)


def test_quantile_score_unit_examples():
    assert quantile_score(1.0, 2.0, 0.9) == pytest.approx(0.2)
    assert quantile_score(2.0, 1.0, 0.9) == pytest.approx(1.8)
    rng = np.random.default_rng(5)
    y, q = rng.normal(60, 15, (2, 500))
    assert np.all(quantile_score(y, q, 0.37) >= 0.0)


def test_brier_score_certain_forecasts():
    assert brier_score(70.0, 0.0, 75.0) == 0.0
    assert brier_score(70.0, 1.0, 75.0) == 1.0


def test_single_record_report_matches_scores():
    report = score_forecasts([81.0], {0.9: [75.0]}, {75.0: [0.4]}, 'one')
    assert report.n_test == 1
    assert report.quantile_scores[0.9] == pytest.approx(quantile_score(81.0, 75.0, 0.9))
    assert report.brier_scores[75.0] == pytest.approx(100 * brier_score(81.0, 0.4, 75.0))

def test_score_forecasts_scales_brier():
    report = score_forecasts([80.0, 60.0], {0.5: [70.0, 70.0]}, {75.0: [0.5, 0.5]}, 'm')
    assert report.brier_scores[75.0] == pytest.approx(25.0)
    assert report.quantile_scores[0.5] == pytest.approx(10.0)
    assert list(report.to_series().index) == ['QS tau=0.5', 'BS c=75']
    with pytest.raises(InputError):
        score_forecasts([], {}, {}, 'empty')


def test_split_sizes():
    data = small_dataset(7)
    train, test = split_train_test(data, 0.5, seed=3)
    assert (len(train), len(test)) == (4, 3)
    assert sorted(np.r_[train.day, test.day].tolist()) == list(range(7))
    again, _ = split_train_test(data, 0.5, seed=3)
    np.testing.assert_array_equal(train.day, again.day)
    with pytest.raises(InputError):
        split_train_test(data, 1.0)


def test_perfect_cmaq_scores_zero(tiny_synthetic):
    field, data, _ = tiny_synthetic
    exact = MonitorDataset(data.day, data.site, field.base[data.day, data.record_cells(field)],
                           data.site_ids, data.site_xy, data.site_cell)
    report = cmaq_baseline(exact, field)
    assert all(v == 0.0 for v in report.quantile_scores.values())
    assert all(v == 0.0 for v in report.brier_scores.values())


def test_slr_fallback_flags(tiny_synthetic):
    field, data, _ = tiny_synthetic
    rows = np.flatnonzero(data.site >= 2)
    single = np.flatnonzero(data.site == 0)[:1]
    train = data.subset(np.sort(np.r_[rows, single]))
    _, slopes, flags = fit_site_regressions(train, field)
    assert set(flags) == {0, 1}
    assert slopes[0] == 0.0
    assert 'intercept-only' in flags[0] and 'pooled' in flags[1]
    report = slr_baseline(train, data, field)
    assert len(report.flags) == 2
    assert report.label == 'SLR'


def test_slr_exact_linear_fit_scores_zero(tiny_synthetic):
    field, data, _ = tiny_synthetic
    C0 = field.base[data.day, data.record_cells(field)]
    exact = MonitorDataset(data.day, data.site, 2.0 + 3.0 * C0,
                           data.site_ids, data.site_xy, data.site_cell)
    intercepts, slopes, flags = fit_site_regressions(exact, field)
    assert not flags
    np.testing.assert_allclose(intercepts, 2.0, atol=1e-8)
    np.testing.assert_allclose(slopes, 3.0, atol=1e-10)
    report = slr_baseline(exact, exact, field)
    assert all(v == pytest.approx(0.0, abs=1e-8) for v in report.quantile_scores.values())
    assert all(v == 0.0 for v in report.brier_scores.values())

def test_truth_beats_shifted_state(tiny_synthetic):
    field, data, truth = tiny_synthetic
    shifted = truth.state.copy()
    shifted.model.beta[:, 0] += 15.0
    good = score_model(truth.state, data, field, label='truth')
    bad = score_model(shifted, data, field, label='shifted')
    assert good.quantile_scores[0.75] < bad.quantile_scores[0.75]
    table = score_table([good, bad, cmaq_baseline(data, field)])
    assert list(table.columns) == ['truth', 'shifted', 'CMAQ']
    assert table.index.name == 'metric'
    assert table.index[0] == 'QS tau=0.75' and table.index[-1] == 'BS c=100'


if __name__ == "__main__":
    print("\n" + "=" * 60)
    print("SCORING TESTS")
    print("=" * 60)
    raise SystemExit(pytest.main([__file__, '-v']))
