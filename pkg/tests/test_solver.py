import numpy as np
import pytest

from helpers import payoff_matrices, random_reduced, support_enumeration

from advclass_ne import (
    InputError,
    ModelAssumptionError,
    ReducedGame,
    build_matrices,
    compute_all_ne,
    compute_beta,
    tie_compare,
    verify_ne,
)
from advclass_ne.experiments import reference_setup
from advclass_ne.oracle import solve_defender_lp
from advclass_ne.solver import Ordering, compute_alpha, defender_objective, reduced_payoffs


def test_matrices_two_rewards():
    g = ReducedGame([1.0, 2.0], [0.4, 0.6], 0.5, 3.0, 1.0)
    m = build_matrices(g, 1.0)
    np.testing.assert_array_equal(m.lambda_tilde, [[2, -1, -1], [1, 1, -2]])
    np.testing.assert_array_equal(m.lam, [[5, 2, 2], [4, 4, 1]])
    np.testing.assert_allclose(m.mu, [1.0, 0.6, 0.0], atol=1e-15)
    assert m.shift == 3.0
    np.testing.assert_allclose(m.lambda_eq, m.lam - m.mu[None, :])


def test_matrices_single_reward():
    m = build_matrices(ReducedGame([1.0], [1.0], 0.5, 2.0, 1.0), 1.0)
    np.testing.assert_array_equal(m.lam, [[3, 1]])


@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_epsilon_must_be_positive(eps):
    with pytest.raises(InputError):
        build_matrices(ReducedGame([1.0], [1.0], 0.5, 2.0, 1.0), eps)


def test_zero_noise_level_is_model_violation():
    g = ReducedGame([1.0, 2.0], [1.0, 0.0], 0.5, 1.0, 1.0)
    with pytest.raises(ModelAssumptionError) as exc:
        build_matrices(g)
    assert "strictly decreasing" in exc.value.assumption


def test_zero_detection_cost_is_model_violation():
    with pytest.raises(ModelAssumptionError):
        compute_all_ne(ReducedGame([1.0, 2.0], [0.5, 0.5], 0.5, 0.0, 1.0))


def test_compute_beta_type2_arithmetic():
    g = ReducedGame([1.0, 2.0, 4.0], [0.3, 0.3, 0.4], 0.5, 10.0, 1.0)
    beta, _ = compute_beta(g, 1, 2)
    np.testing.assert_allclose(beta, [0.0, 0.1, 0.2, 0.7], atol=1e-15)


def test_compute_beta_type1_remainder_zero():
    g = ReducedGame([1.0, 2.0], [0.5, 0.5], 0.5, 1.0, 1.0)
    beta, _ = compute_beta(g, 1, 1)
    np.testing.assert_array_equal(beta, [0.0, 1.0, 0.0])


def test_compute_beta_infeasible_and_out_of_range():
    g = ReducedGame([1.0, 5.0, 9.0], [0.3, 0.3, 0.4], 0.5, 2.0, 1.0)
    assert compute_beta(g, 1, 2) == (None, -np.inf)  # gaps sum to 4 > c_d
    g = ReducedGame([1.0, 2.0, 3.0], [0.3, 0.3, 0.4], 0.5, 10.0, 1.0)
    assert compute_beta(g, 3, 1)[0] is None  # leftover 1 exceeds (r3 - r2)/c_d
    with pytest.raises(InputError):
        compute_beta(g, 0, 1)
    with pytest.raises(InputError):
        compute_beta(g, 1, 3)


def test_compute_beta_reports_objective():
    g = ReducedGame([1.0, 2.0, 4.0], [0.3, 0.3, 0.4], 0.5, 10.0, 1.0)
    m = build_matrices(g)
    beta, u = compute_beta(g, 1, 2, m)
    assert u == pytest.approx(float((m.lam @ beta).min() - m.mu @ beta), abs=1e-13)


def test_tie_compare():
    assert tie_compare(2.0, 1.0, 1e-9) == Ordering.GREATER
    assert tie_compare(1.0, 1.0 + 1e-12, 1e-9) == Ordering.EQUAL
    assert tie_compare(1.0, 1.0 * (1 + 1e-6), 1e-9) == Ordering.LESS
    assert tie_compare(1e6, 1e6 + 1e-4, 1e-9) == Ordering.EQUAL
    with pytest.raises(InputError):
        tie_compare(1.0, 1.0, 0.0)


def test_single_reward_game():
    g = ReducedGame([1.0], [1.0], 0.5, 2.0, 1.0)
    m = build_matrices(g)
    b1, u1 = compute_beta(g, 1, 1, m)
    b2, u2 = compute_beta(g, 1, 2, m)
    assert u1 == pytest.approx(g.c_d + m.epsilon - 1.0)  # Lambda = 3, mu_1 = 1
    assert u2 == pytest.approx(m.epsilon)
    eq = compute_all_ne(g)
    assert (eq.case, eq.k) == ("i", 1)
    np.testing.assert_array_equal(eq.beta, [1.0, 0.0])
    np.testing.assert_array_equal(eq.alpha, [1.0])
    assert eq.defender_value == pytest.approx(solve_defender_lp(m)[1] - m.shift, abs=1e-10)


def test_reference_binomial_equilibrium():
    g = reference_setup().game()
    eq = compute_all_ne(g)
    assert eq.singleton
    k, beta, alpha = eq.k, eq.beta, eq.alpha
    # defender support: thresholds k+1..n (1-based) plus the boundary
    interior_beta = beta[k:g.n]
    np.testing.assert_allclose(interior_beta, 1.0 / 120.0, rtol=0, atol=1e-12)
    interior_alpha = alpha[k:g.n - 1]
    np.testing.assert_allclose(interior_alpha, 14.0 / 3.0 * g.noise[k:g.n - 1], rtol=0, atol=1e-10)
    assert g.proportional_factor == pytest.approx(14.0 / 3.0, rel=1e-15)
    assert np.all(alpha[:k - 1] == 0.0)
    assert verify_ne(g, alpha, beta, tol=1e-9).passed


def test_two_reward_game_against_support_enumeration():
    g = ReducedGame([1.0, 2.0], [0.5, 0.5], 0.5, 1.0, 1.0)
    eq = compute_all_ne(g)
    u_a, u_d = payoff_matrices(g)
    found = support_enumeration(u_a, u_d)
    assert found
    for x, y in found:
        assert float(x @ u_d @ y) == pytest.approx(eq.defender_value, abs=1e-10)
    # by hand: beta=(0,1,0), value -r1 - mu_2 = -1.5, attacker segment alpha_1 in [0, 0.5]
    assert eq.defender_value == pytest.approx(-1.5, abs=1e-12)
    assert eq.case == "iii"
    np.testing.assert_array_equal(eq.beta, [0.0, 1.0, 0.0])
    np.testing.assert_allclose(sorted(a[0] for a in eq.alpha_vertices), [0.0, 0.5], atol=1e-15)


def test_case_iii_upper_endpoint_keeps_never_column_dominated():
    # alpha_k's upper end is limited by alpha_n >= factor * P_N(r_n)
    g = ReducedGame([2.5, 6.0], [0.6626, 0.3374], 0.565, 3.5, 8.90)
    eq = compute_all_ne(g)
    assert eq.case == "iii"
    prop = g.proportional_factor * g.noise
    assert prop[0] > 1.0  # unconstrained formula would put all mass on level k
    np.testing.assert_allclose(eq.alpha_vertices[1], [1.0 - prop[1], prop[1]], atol=1e-15)
    for a in eq.alpha_vertices:
        assert verify_ne(g, a, eq.beta, tol=1e-12).passed
    assert not verify_ne(g, [1.0, 0.0], eq.beta, tol=1e-9).passed


def test_case_iv_two_defender_vertices():
    # c_d = r_3 - r_1 and mu_2 = c_d, so type-2 vertices at s=1 and s=2 tie
    g = ReducedGame([1.0, 2.0, 4.0], [0.5, 0.3, 0.2], 0.5, 3.0, 6.0)
    eq = compute_all_ne(g)
    assert (eq.case, eq.k) == ("iv", 2)
    np.testing.assert_allclose(eq.beta_vertices[0], [0, 1 / 3, 2 / 3, 0], atol=1e-15)
    np.testing.assert_allclose(eq.beta_vertices[1], [0, 0, 2 / 3, 1 / 3], atol=1e-15)
    # factor = 2; level 2 mimics the non-attacker, the top level takes the rest
    (alpha,) = eq.alpha_vertices
    np.testing.assert_allclose(alpha, [0.0, 0.6, 0.4], atol=1e-15)
    for w in (0.0, 0.3, 1.0):
        _, beta = eq.combination([1.0], [w, 1.0 - w])
        assert verify_ne(g, alpha, beta, tol=1e-12).passed


def test_defender_value_unshifted_and_common():
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = random_reduced(rng)
        eq = compute_all_ne(g)
        m = build_matrices(g)
        assert eq.lp_value - m.shift == pytest.approx(eq.defender_value, abs=1e-12)
        for a in eq.alpha_vertices:
            for b in eq.beta_vertices:
                assert reduced_payoffs(g, a, b)[1] == pytest.approx(eq.defender_value, abs=1e-9)
                assert defender_objective(g, m, b) == pytest.approx(eq.lp_value, abs=1e-10)


def test_compute_alpha_top_level():
    g = ReducedGame([1.0, 2.0], [0.5, 0.5], 0.5, 1.0, 1.0)
    (a,) = compute_alpha(g, 2, [np.array([0.0, 0.0, 1.0])])
    np.testing.assert_array_equal(a, [0.0, 1.0])


def test_equilibrium_set_strategies():
    g = ReducedGame([1.0, 2.0], [0.5, 0.5], 0.5, 1.0, 1.0)
    eq = compute_all_ne(g)
    assert eq.beta_strategy().labels == g.thresholds()
    assert eq.alpha_strategy(1).as_dict() == {1.0: 0.5, 2.0: 0.5}
