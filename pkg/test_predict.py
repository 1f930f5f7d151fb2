"""
Test Scenario Prediction
Order statistics, scenario specs, paired replicate simulation
"""

from pathlib import Path

import numpy as np
import pytest

from scipy.special import ndtri
from scipy.stats import kstest

from inference import CopulaParams, PosteriorDraws, PosteriorState, flatten_state, parameter_names
from inference.copula import INDEPENDENT_PHI
from predict import (
    ScenarioSpec,
    exceedance_probability,
    kth_largest,
    run_scenario,
    run_scenario_set,
    scenario_concentrations,
    simulate_site_year,
)
from rfm import compose_perturbation, evaluate_rfm_field
from src.errors import InputError
from tail import ConditionalModelParams, QuantileBasis, conditional_cdf, conditional_quantile

SCENARIO_DIR = Path(__file__).parent / 'data' / 'scenarios'


@pytest.fixture(scope='module')
def tiny_run_inputs(tiny_synthetic):
    field, _, truth = tiny_synthetic
    return field, truth.as_draws(list(field.input_names)), CopulaParams(2.0)


def spec(name, eta, replicates=12, **kwargs):
    return ScenarioSpec(name, eta, replicates=replicates, **kwargs)


# ---------------------------------------------------------------- statistics

def test_kth_largest():
    assert kth_largest([3.0, 9.0, 1.0, 7.0], 1) == 9.0
    assert kth_largest([3.0, 9.0, 1.0, 7.0], 2) == 7.0
    grid = np.array([[1.0, 5.0], [4.0, 2.0], [3.0, 8.0]])
    np.testing.assert_array_equal(kth_largest(grid, 2, axis=0), [3.0, 5.0])
    for k in (0, 5):
        with pytest.raises(InputError):
            kth_largest([1.0, 2.0, 3.0, 4.0], k)


def test_exceedance_probability():
    assert exceedance_probability([70.0, 80.0, 90.0], 75.0) == pytest.approx(2 / 3)
    assert exceedance_probability([70.0, 80.0], -np.inf) == 1.0
    with pytest.raises(InputError):
        exceedance_probability([], 75.0)


def test_kth_largest_matches_sort():
    assert kth_largest([1.0, 2.0, 3.0, 4.0, 5.0], 4) == 2.0
    values = np.random.default_rng(0).normal(60, 10, 92)
    assert kth_largest(values, 4) == np.sort(values)[-4]
    assert exceedance_probability(np.r_[np.full(7, 60.0), np.full(3, 80.0)], 75.0) == 0.3


def test_simulated_marginal_and_persistence(tiny_synthetic):
    _, _, truth = tiny_synthetic
    model = truth.state.model
    n = 100_000
    C = np.full(n, 62.0)
    resolved = model.resolve(C, np.zeros(n, int))
    q95 = conditional_quantile(0.95, resolved.take([0]))[0]

    iid = simulate_site_year(C, model, 0, INDEPENDENT_PHI, np.random.default_rng(10))
    band = 2.576 * np.sqrt(n * 0.95 * 0.05)
    assert abs(np.sum(iid <= q95) - 0.95 * n) < band

    y = simulate_site_year(C, model, 0, 2.0, np.random.default_rng(11))
    z = ndtri(conditional_cdf(y, resolved))
    assert np.corrcoef(z[:-1], z[1:])[0, 1] == pytest.approx(np.exp(-0.5), abs=0.02)


def test_simulated_marginal_passes_ks(tiny_synthetic):
    _, _, truth = tiny_synthetic
    model = truth.state.model
    n, n_days, day = 4000, 15, 7
    C = np.linspace(40.0, 75.0, n_days)
    rng = np.random.default_rng(12)
    y = np.array([simulate_site_year(C, model, 2, 2.0, rng)[day] for _ in range(n)])
    u = conditional_cdf(y, model.resolve(np.full(n, C[day]), np.full(n, 2)))
    assert kstest(u, 'uniform').statistic < 2.0 / np.sqrt(n)


# ---------------------------------------------------------------- scenario specs

def test_parse_inline_scenario():
    s = ScenarioSpec.parse("s1=-0.5,0,0", replicates=5, k=2)
    assert s.name == 's1'
    np.testing.assert_array_equal(s.eta, [-0.5, 0.0, 0.0])
    assert (s.replicates, s.k, s.thresholds) == (5, 2, [75.0])
    with pytest.raises(InputError):
        ScenarioSpec.parse("no equals sign")
    with pytest.raises(InputError):
        ScenarioSpec.parse("s=a,b")


def test_scenario_validation():
    with pytest.raises(InputError):
        ScenarioSpec('cut', [-1.0, 0.0])
    with pytest.raises(InputError):
        ScenarioSpec('none', [0.0], replicates=0)
    with pytest.raises(InputError):
        ScenarioSpec.from_dict({'name': 'x', 'eta': [0.0], 'colour': 'red'})


def test_scenario_files():
    available = ScenarioSpec.list_available(SCENARIO_DIR)
    assert [s.name for _, s in available] == ['s0_base', 's1_mobile_nox', 's2_point_nox',
                                              's3_all_nox']
    s3 = ScenarioSpec.load_from_file(SCENARIO_DIR / 's3_all_nox.yaml')
    np.testing.assert_allclose(s3.eta, [-0.15, -0.15, -0.15, 0.0, 0.0, 0.0])
    assert ScenarioSpec.from_dict(s3.to_dict()).to_dict() == s3.to_dict()
    with pytest.raises(FileNotFoundError):
        ScenarioSpec.load_from_file(SCENARIO_DIR / 'missing.yaml')


# ---------------------------------------------------------------- simulation

def test_scenario_concentrations_over_draws(tiny_synthetic):
    field, _, truth = tiny_synthetic
    draws = truth.as_draws(list(field.input_names))
    values = np.repeat(draws.values, 10, axis=0)
    values[:, :3] = np.random.default_rng(8).uniform(-0.4, 0.4, (10, 3))
    draws = PosteriorDraws(values, draws.names, draws.template, draws.site_ids, draws.site_xy,
                           draws.input_names)
    s1 = np.array([-0.5, 0.0, 0.0])
    for i in range(len(draws)):
        alpha = draws.state(i).alpha
        np.testing.assert_array_equal(compose_perturbation(alpha, np.zeros(3)), alpha)
        np.testing.assert_array_equal(scenario_concentrations(field, alpha, np.zeros(3)),
                                      evaluate_rfm_field(field, alpha))
        np.testing.assert_array_equal(scenario_concentrations(field, alpha, s1),
                                      evaluate_rfm_field(field, alpha + s1 * (1.0 + alpha)))


def test_simulate_with_fixed_latent_gives_median(tiny_synthetic):
    _, _, truth = tiny_synthetic
    model = truth.state.model
    C = np.array([45.0, 60.0])
    y = simulate_site_year(C, model, 0, 2.0, np.random.default_rng(0), z=np.zeros(2))
    np.testing.assert_allclose(y, conditional_quantile(np.full(2, 0.5), model.resolve(C, [0, 0])))
    series = simulate_site_year(np.full(30, 50.0), model, 1, 2.0, np.random.default_rng(1))
    assert series.shape == (30,)


def test_degenerate_posterior_matches_brute_force(tiny_synthetic):
    field, _, truth = tiny_synthetic
    n_sites = len(truth.site_ids)
    model = ConditionalModelParams.zeros(QuantileBasis(1), 1, n_sites, use_gpd=False)
    model.beta[:] = [50.0, 10.0]
    model.theta[:, 0, :] = [-20.0, 0.0]
    state = PosteriorState(np.zeros(3), model, gp_mean=[[50.0, 10.0], [-20.0, 0.0]],
                           gp_variance=np.full((2, 2), 1e-12), gp_range=50.0)
    names = parameter_names(state, truth.site_ids, list(field.input_names))
    draws = PosteriorDraws(flatten_state(state)[None, :], names, state.copy(),
                           truth.site_ids, truth.site_xy, list(field.input_names))

    k = 4
    run = run_scenario(spec('s0', np.zeros(3), replicates=3, k=k), draws, field,
                       CopulaParams(2.0), seed=1)
    expected = kth_largest(50.0 + 10.0 * (field.base - 50.0) / 15.0, k, axis=0)
    np.testing.assert_allclose(run.mean_kth, expected, rtol=0, atol=1e-4)


def test_summary_shape_and_determinism(tiny_run_inputs):
    field, draws, copula = tiny_run_inputs
    s0 = spec('s0', np.zeros(3), thresholds=[60.0, 75.0])
    first = run_scenario(s0, draws, field, copula, seed=4, keep_draws=True)
    frame = first.to_frame()
    assert len(frame) == field.n_cells
    assert list(frame.columns) == ['cell_id', 'x_km', 'y_km', 'mean_kth', 'mean_max',
                                   'p_exceed_60', 'p_exceed_75']
    assert np.all(frame['mean_max'] >= frame['mean_kth'])
    assert np.all(frame['p_exceed_60'] >= frame['p_exceed_75'])
    assert len(first.kth_draws) == 12

    again = run_scenario(s0, draws, field, copula, seed=4)
    np.testing.assert_array_equal(first.mean_kth, again.mean_kth)


def test_scenarios_share_replicates(tiny_run_inputs):
    field, draws, copula = tiny_run_inputs
    s0 = spec('s0', np.zeros(3))
    alone = run_scenario(s0, draws, field, copula, seed=9)
    together = run_scenario_set([s0, spec('s1', [-0.5, 0.0, 0.0])], draws, field, copula, seed=9)
    np.testing.assert_array_equal(alone.mean_kth, together.summaries['s0'].mean_kth)


def test_identical_scenarios_have_zero_difference(tiny_run_inputs):
    field, draws, copula = tiny_run_inputs
    run = run_scenario_set([spec('a', np.zeros(3)), spec('b', np.zeros(3))],
                           draws, field, copula, seed=2)
    diff = run.differences['b'].to_frame(field.cell_ids, field.xy)
    assert np.all(diff['mean_diff_kth'] == 0.0)
    assert np.all(diff['p_greater'] == 0.0)


def test_nox_cut_lowers_kth_largest(tiny_run_inputs):
    field, draws, copula = tiny_run_inputs
    run = run_scenario_set([spec('s0', np.zeros(3)), spec('s1', [-0.5, 0.0, 0.0])],
                           draws, field, copula, seed=5)
    diff = run.differences['s1'].to_frame(field.cell_ids, field.xy)
    assert diff['mean_diff_kth'].mean() < 0.0
    assert diff['p_greater'].mean() < 0.5


def test_scenario_set_validation(tiny_run_inputs):
    field, draws, copula = tiny_run_inputs
    with pytest.raises(InputError):
        run_scenario_set([], draws, field, copula, seed=0)
    with pytest.raises(InputError):
        run_scenario_set([spec('a', np.zeros(3)), spec('b', np.zeros(3), replicates=5)],
                         draws, field, copula, seed=0)
    with pytest.raises(InputError):
        run_scenario_set([spec('a', np.zeros(3), k=field.n_days + 1)], draws, field, copula, seed=0)
    with pytest.raises(InputError):
        run_scenario_set([spec('a', np.zeros(2))], draws, field, copula, seed=0)
    with pytest.raises(InputError):
        run_scenario_set([spec('a', np.zeros(3))], draws, field, copula, seed=0, baseline='zz')


if __name__ == "__main__":
    print("\n" + "=" * 60)
    print("SCENARIO PREDICTION TESTS")
    print("=" * 60)
    raise SystemExit(pytest.main([__file__, '-v']))
