"""
Test Reduced-Form Model
Scalar vs. grid evaluation, the second-order formula and perturbation composition
"""

import numpy as np
import pytest

from rfm import (
    SensitivityField,
    compose_perturbation,
    evaluate_rfm,
    evaluate_rfm_at,
    evaluate_rfm_field,
    negative_fraction,
)
from src.errors import InputError


def random_field(d=4, n_days=5, n_cells=7, seed=0):
    rng = np.random.default_rng(seed)
    n_pairs = d * (d - 1) // 2
    return SensitivityField(
        cell_ids=np.array([f"c{i}" for i in range(n_cells)], dtype=object),
        xy=rng.uniform(0, 100, (n_cells, 2)),
        base=rng.uniform(30, 70, (n_days, n_cells)),
        first_order=rng.normal(0, 8, (d, n_days, n_cells)),
        second_order_diag=rng.normal(0, 3, (d, n_days, n_cells)),
        second_order_cross=rng.normal(0, 1, (n_pairs, n_days, n_cells)),
    )


def test_single_input_formula():
    """C0 + S1 a + 1/2 S2 a^2 with one input"""
    field = SensitivityField(
        cell_ids=np.array(['a']), xy=[[0.0, 0.0]], base=[[40.0]],
        first_order=[[[10.0]]], second_order_diag=[[[-4.0]]], second_order_cross=[])
    assert evaluate_rfm(field, 0, 0, [0.5]) == pytest.approx(44.5, abs=1e-12)
    assert evaluate_rfm(field, 0, 0, [0.0]) == 40.0


def test_cross_term():
    field = SensitivityField(
        cell_ids=np.array(['a']), xy=[[0.0, 0.0]], base=[[50.0]],
        first_order=[[[0.0]], [[0.0]]], second_order_diag=[[[0.0]], [[0.0]]],
        second_order_cross=[[[6.0]]])
    assert evaluate_rfm(field, 0, 0, [0.5, -0.5]) == pytest.approx(50.0 - 1.5, abs=1e-12)


def test_field_matches_scalar_exactly():
    field = random_field()
    rng = np.random.default_rng(1)
    for _ in range(5):
        alpha = rng.uniform(-0.9, 1.0, field.n_inputs)
        grid = evaluate_rfm_field(field, alpha)
        assert grid.shape == (field.n_days, field.n_cells)
        for t in range(field.n_days):
            for c in range(field.n_cells):
                assert grid[t, c] == evaluate_rfm(field, t, c, alpha)


def test_scattered_matches_field():
    field = random_field(seed=2)
    alpha = np.array([0.2, -0.3, 0.1, 0.0])
    days = np.array([0, 4, 2, 2, 1])
    cells = np.array([6, 0, 3, 3, 5])
    np.testing.assert_array_equal(evaluate_rfm_at(field, days, cells, alpha),
                                  evaluate_rfm_field(field, alpha)[days, cells])


def test_zero_perturbation_is_base_run():
    field = random_field(seed=3)
    np.testing.assert_array_equal(evaluate_rfm_field(field, np.zeros(field.n_inputs)),
                                  field.base)


def test_wrong_alpha_length():
    field = random_field(d=3)
    with pytest.raises(InputError):
        evaluate_rfm_field(field, [0.1, 0.2])
    with pytest.raises(InputError):
        evaluate_rfm(field, field.n_days, 0, [0.0, 0.0, 0.0])


def test_mismatched_shapes_rejected():
    with pytest.raises(InputError):
        SensitivityField(cell_ids=np.array(['a', 'b']), xy=np.zeros((2, 2)),
                         base=np.zeros((3, 2)), first_order=np.zeros((2, 3, 2)),
                         second_order_diag=np.zeros((2, 3, 2)),
                         second_order_cross=np.zeros((2, 3, 2)))


def test_compose_identity_and_example():
    alpha = np.array([0.1, -0.2, 0.0])
    np.testing.assert_array_equal(compose_perturbation(alpha, np.zeros(3)), alpha)
    np.testing.assert_allclose(compose_perturbation([0.2], [-0.5]), [-0.4])
    rng = np.random.default_rng(9)
    for _ in range(50):
        a = rng.uniform(-0.9, 1.5, 6)
        np.testing.assert_array_equal(compose_perturbation(a, np.zeros(6)), a)


def test_compose_associative():
    rng = np.random.default_rng(4)
    for _ in range(100):
        a, b, c = rng.uniform(-0.9, 1.5, (3, 6))
        left = compose_perturbation(compose_perturbation(a, b), c)
        right = compose_perturbation(a, compose_perturbation(b, c))
        np.testing.assert_allclose(left, right, rtol=0, atol=1e-12)


def test_central_difference_recovers_first_order():
    field = random_field(seed=6)
    h = 1e-3
    for j in range(field.n_inputs):
        step = np.zeros(field.n_inputs)
        step[j] = h
        slope = (evaluate_rfm_field(field, step) - evaluate_rfm_field(field, -step)) / (2 * h)
        np.testing.assert_allclose(slope, field.first_order[j], rtol=0, atol=1e-8)


def test_inverse_control_restores_field():
    field = random_field(seed=7)
    alpha = np.array([0.1, -0.2, 0.3, 0.0])
    eta = np.array([-0.5, 0.25, 0.0, -0.2])
    back = 1.0 / (1.0 + eta) - 1.0
    restored = compose_perturbation(compose_perturbation(alpha, eta), back)
    np.testing.assert_allclose(evaluate_rfm_field(field, restored),
                               evaluate_rfm_field(field, alpha), rtol=0, atol=1e-10)


def test_compose_rejects_full_cut():
    with pytest.raises(InputError):
        compose_perturbation([0.0, 0.0], [-1.0, 0.0])
    with pytest.raises(InputError):
        compose_perturbation([0.0], [0.0, 0.0])


def test_negative_values_reported_not_clipped():
    field = SensitivityField(
        cell_ids=np.array(['a', 'b']), xy=np.zeros((2, 2)), base=[[5.0, 50.0]],
        first_order=[[[20.0, 1.0]]], second_order_diag=[[[0.0, 0.0]]], second_order_cross=[])
    C = evaluate_rfm_field(field, [-0.9])
    assert C[0, 0] == pytest.approx(-13.0)
    assert negative_fraction(C) == 0.5


def test_subset_cells():
    field = random_field(seed=5)
    sub = field.subset_cells([1, 4])
    assert sub.n_cells == 2
    alpha = np.array([0.3, 0.1, -0.2, 0.05])
    np.testing.assert_array_equal(evaluate_rfm_field(sub, alpha),
                                  evaluate_rfm_field(field, alpha)[:, [1, 4]])
    assert list(field.cell_index(['c4', 'zz'])) == [4, -1]


if __name__ == "__main__":
    print("\n" + "=" * 60)
    print("REDUCED-FORM MODEL TESTS")
    print("=" * 60)
    raise SystemExit(pytest.main([__file__, '-v']))
