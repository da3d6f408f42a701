"""Structural invariants of the equilibrium set, checked on random games."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import reduced_games

from advclass_ne import MixedStrategy, build_matrices, compute_all_ne, detection_profile, verify_ne
from advclass_ne.oracle import optimal_vertices
from advclass_ne.solver import defender_objective

games = st.one_of(reduced_games(), reduced_games(degenerate=True))


def _attacker_row_payoffs(g, beta):
    pi = detection_profile(MixedStrategy(g.thresholds(), beta), g).values
    return g.rewards - g.c_d * pi


@settings(max_examples=150, deadline=None)
@given(games)
def test_detection_profile_monotone_in_reward(g):
    eq = compute_all_ne(g)
    for b in eq.beta_vertices:
        pi = detection_profile(MixedStrategy(g.thresholds(), b), g).values
        assert np.all(np.diff(pi) >= -1e-12)
        assert pi[0] >= -1e-12 and pi[-1] <= 1 + 1e-12


@settings(max_examples=150, deadline=None)
@given(games)
def test_case_determines_shape_of_equilibrium_set(g):
    eq = compute_all_ne(g)
    assert 1 <= eq.k <= g.n
    shapes = {"i": (1, 1), "ii": (1, 1), "iii": (1, 2), "iv": (2, 1)}
    assert (len(eq.beta_vertices), len(eq.alpha_vertices)) == shapes[eq.case]
    assert eq.singleton == (eq.case in ("i", "ii"))


@settings(max_examples=150, deadline=None)
@given(games)
def test_interior_levels_mimic_noise(g):
    eq = compute_all_ne(g)
    k, n = eq.k, g.n
    for a in eq.alpha_vertices:
        np.testing.assert_allclose(a[k:n - 1], g.proportional_factor * g.noise[k:n - 1], rtol=1e-9, atol=1e-12)
        assert np.all(a[:k - 1] == 0.0)


@settings(max_examples=150, deadline=None)
@given(games)
def test_best_response_set_is_contiguous_suffix(g):
    eq = compute_all_ne(g)
    for b in eq.beta_vertices:
        u = _attacker_row_payoffs(g, b)
        tight = np.flatnonzero(u >= u.max() - 1e-9 * max(1.0, abs(u.max())))
        assert tight[-1] == g.n - 1
        assert np.array_equal(tight, np.arange(tight[0], g.n))
        for a in eq.alpha_vertices:
            assert set(np.flatnonzero(a > 1e-12)) <= set(tight)


@settings(max_examples=150, deadline=None)
@given(games)
def test_defender_vertices_are_threshold_blocks(g):
    eq = compute_all_ne(g)
    starts = []
    for b in eq.beta_vertices:
        support = np.flatnonzero(b[:g.n] > 1e-12)
        if support.size:
            assert np.array_equal(support, np.arange(support[0], support[-1] + 1))
            assert support[-1] == g.n - 1 or b[g.n] > 0 or support[-1] == support[0]
            starts.append(int(support[0]))
    # two vertices at most, and when both exist their blocks start at adjacent levels
    if len(starts) == 2:
        assert abs(starts[0] - starts[1]) <= 1


@settings(max_examples=100, deadline=None)
@given(games)
def test_shift_does_not_change_equilibria(g):
    ref = compute_all_ne(g, epsilon=1.0)
    for eps in (0.5, 2.0):
        eq = compute_all_ne(g, epsilon=eps)
        assert (eq.case, eq.k) == (ref.case, ref.k)
        assert abs(eq.defender_value - ref.defender_value) <= 1e-10 * max(1.0, abs(ref.defender_value))
        for x, y in zip(eq.beta_vertices, ref.beta_vertices):
            np.testing.assert_allclose(x, y, atol=1e-12)
        for x, y in zip(eq.alpha_vertices, ref.alpha_vertices):
            np.testing.assert_allclose(x, y, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(games, st.integers(0, 2**32 - 1))
def test_false_alarm_offset_preserves_row_argmin(g, seed):
    m = build_matrices(g)
    rng = np.random.default_rng(seed)
    for beta in rng.dirichlet(np.ones(g.n + 1), size=100):
        a, b = m.lam @ beta, m.lambda_eq @ beta
        assert set(np.flatnonzero(a <= a.min() + 1e-12)) == set(np.flatnonzero(b <= b.min() + 1e-12))


@settings(max_examples=100, deadline=None)
@given(games)
def test_every_mixture_of_vertices_is_an_equilibrium(g):
    eq = compute_all_ne(g)
    m = build_matrices(g)
    for w in (0.0, 0.25, 1.0):
        aw = [w, 1 - w] if len(eq.alpha_vertices) == 2 else [1.0]
        bw = [w, 1 - w] if len(eq.beta_vertices) == 2 else [1.0]
        alpha, beta = eq.combination(aw, bw)
        assert verify_ne(g, alpha, beta, tol=1e-9).passed
        assert abs(defender_objective(g, m, beta) - eq.lp_value) <= 1e-9 * max(1.0, abs(eq.lp_value))


def _level_cases(g, alpha, beta, tol=1e-12):
    pi = detection_profile(MixedStrategy(g.thresholds(), beta), g).values
    return [0 if a <= tol and d <= tol else 1 if d <= tol else 2 if a > tol else -1 for a, d in zip(alpha, pi)]


@settings(max_examples=150, deadline=None)
@given(games, st.floats(0.0, 1.0))
def test_level_trichotomy_and_ordering(g, w):
    eq = compute_all_ne(g)
    aw = [w, 1 - w] if len(eq.alpha_vertices) == 2 else [1.0]
    bw = [w, 1 - w] if len(eq.beta_vertices) == 2 else [1.0]
    alpha, beta = eq.combination(aw, bw)
    cases = np.array(_level_cases(g, alpha, beta))
    assert -1 not in cases  # never alpha = 0 with pi > 0
    r = g.rewards
    for lo, hi in ((0, 1), (1, 2), (0, 2)):
        if (cases == lo).any() and (cases == hi).any():
            top = r[cases == lo].max()
            assert top < r[cases == hi].min() if hi == 2 else top <= r[cases == hi].min()


@settings(max_examples=80, deadline=None)
@given(st.one_of(reduced_games(max_levels=5), reduced_games(degenerate=True)))
def test_optimal_lp_vertices_have_two_shapes(g):
    verts = optimal_vertices(build_matrices(g))
    n = g.n
    type2_starts, type1 = [], 0
    for v in verts:
        rows = v.tight_rows
        assert rows[-1] == n and list(rows) == list(range(rows[0], n + 1))
        support = np.flatnonzero(v.beta[:n] > 1e-12)
        if v.beta[n] > 1e-12:
            type2_starts.append(int(support[0]) if support.size else n)
        else:
            type1 += 1
    assert type1 <= 1 and len(type2_starts) <= 2
    if len(type2_starts) == 2:
        assert abs(type2_starts[0] - type2_starts[1]) == 1
