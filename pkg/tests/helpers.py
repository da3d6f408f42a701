"""Shared generators and reference computations for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
from hypothesis import strategies as st

from advclass_ne import GameSpec, ReducedGame


def random_reduced(rng: np.random.Generator, n_lo: int = 2, n_hi: int = 8) -> ReducedGame:
    n = int(rng.integers(n_lo, n_hi + 1))
    rewards = np.sort(rng.uniform(0.0, 10.0, n))
    noise = rng.dirichlet(np.ones(n)) + 1e-6
    noise /= noise.sum()
    return ReducedGame(
        rewards, noise,
        p=float(rng.uniform(0.05, 0.95)),
        c_d=float(rng.uniform(0.1, 10.0)),
        c_fa=float(rng.uniform(0.1, 10.0)),
    )


def degenerate_reduced(rng: np.random.Generator) -> ReducedGame:
    """Dyadic rewards with c_d equal to a reward gap and c_fa placing mu_j on c_d,
    so ties between candidate vertices (cases iii and iv) are common."""
    while True:
        n = int(rng.integers(1, 6))
        rewards = np.sort(rng.choice(np.arange(1, 33), n, replace=False) / 4.0)
        q = np.round(rng.dirichlet(np.ones(n)), 4)
        q[-1] = 1.0 - q[:-1].sum()
        if q.min() > 0.0:
            break
    p = float(rng.uniform(0.1, 0.9))
    j = int(rng.integers(0, n))
    gap = rewards[-1] - rewards[j]
    c_d = float(gap) if gap > 0 else float(rng.uniform(0.5, 3.0))
    if n > 1 and rng.random() < 0.5:
        jj = int(rng.integers(1, n))
        c_fa = c_d * p / ((1.0 - p) * q[jj:].sum())
    else:
        c_fa = float(rng.uniform(0.1, 5.0))
    return ReducedGame(rewards, q, p, c_d, c_fa)


@st.composite
def reduced_games(draw, max_levels: int = 7, degenerate: bool = False) -> ReducedGame:
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if degenerate:
        return degenerate_reduced(rng)
    return random_reduced(rng, 1, max_levels)


def random_full_spec(rng: np.random.Generator, max_vectors: int = 4, force_duplicate: bool = False) -> GameSpec:
    m = int(rng.integers(1, max_vectors + 1))
    rewards = np.round(rng.uniform(0.0, 10.0, m), 3)
    if force_duplicate and m >= 2:
        rewards[int(rng.integers(1, m))] = rewards[0]
    noise = rng.dirichlet(np.ones(m)) + 1e-6
    noise /= noise.sum()
    return GameSpec.from_arrays(
        rewards, noise,
        p=float(rng.uniform(0.05, 0.95)),
        c_d=float(rng.uniform(0.1, 10.0)),
        c_fa=float(rng.uniform(0.1, 10.0)),
    )


def payoff_matrices(game: ReducedGame) -> tuple[np.ndarray, np.ndarray]:
    """(attacker, defender) payoff bimatrix over levels x threshold columns."""
    n = game.n
    detect = np.zeros((n, n + 1))
    detect[:, :n] = np.tril(np.ones((n, n)))
    u_a = game.rewards[:, None] - game.c_d * detect
    false_alarm = game.noise @ detect
    u_d = -u_a - game.fa_weight * false_alarm[None, :]
    return u_a, u_d


def support_enumeration(A: np.ndarray, B: np.ndarray, tol: float = 1e-9):
    """Nash equilibria of the bimatrix game (A row player, B column player) found by
    solving the indifference equations on every pair of equal-size supports."""
    m, n = A.shape
    found = []
    for size in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), size):
            for cols in itertools.combinations(range(n), size):
                # column mix y makes the row player indifferent on ``rows``
                M = np.zeros((size + 1, size + 1))
                M[:size, :size] = A[np.ix_(rows, cols)]
                M[:size, size] = -1.0
                M[size, :size] = 1.0
                rhs = np.zeros(size + 1)
                rhs[size] = 1.0
                N_ = np.zeros((size + 1, size + 1))
                N_[:size, :size] = B[np.ix_(rows, cols)].T
                N_[:size, size] = -1.0
                N_[size, :size] = 1.0
                try:
                    ys = np.linalg.solve(M, rhs)
                    xs = np.linalg.solve(N_, rhs)
                except np.linalg.LinAlgError:
                    continue
                if ys[:size].min() < -tol or xs[:size].min() < -tol:
                    continue
                x = np.zeros(m)
                y = np.zeros(n)
                x[list(rows)] = xs[:size]
                y[list(cols)] = ys[:size]
                if (A @ y).max() > x @ A @ y + tol or (x @ B).max() > x @ B @ y + tol:
                    continue
                found.append((x, y))
    return found
