"""Independent checks for the closed-form solver.

Nothing here calls the equilibrium sweep: values come from the dense simplex
in :mod:`advclass_ne.lp`, from vertex enumeration of the defender polyhedron,
or from brute force over every classifier of a small full game.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import AdvClassError, InputError, ModelAssumptionError, SolverError
from .game import (
    Classifier,
    GameSpec,
    MixedStrategy,
    _alpha_vector,
    defender_best_response,
    detection_probabilities,
    payoffs_from_detection,
)
from .lp import LinearProgram, solve_lp
from .reduction import ReducedGame, reduce, threshold_detection
from .solver import GameMatrices, build_matrices

FULL_GAME_MAX_VECTORS = 12
VERTEX_ENUM_MAX_LEVELS = 16
DEFAULT_VERIFY_TOL = 1e-9


def defender_lp(mats: GameMatrices) -> LinearProgram:
    """maximize -mu'beta + z  s.t.  z <= (Lambda beta)_i,  sum beta = 1,  beta >= 0.

    Variables are ``beta_1 .. beta_{n+1}`` followed by the free ``z``.
    """
    n = mats.n
    A = np.hstack([-mats.lam, np.ones((n, 1))])
    A = np.vstack([A, np.append(np.ones(n + 1), 0.0)])
    senses = ("<=",) * n + ("=",)
    b = np.append(np.zeros(n), 1.0)
    objective = np.append(-mats.mu, 1.0)
    bounds = ((0.0, None),) * (n + 1) + ((None, None),)
    return LinearProgram(objective, A, senses, b, bounds)


def attacker_lp(mats: GameMatrices) -> LinearProgram:
    """maximize y  s.t.  (alpha'Lambda)_j + y <= mu_j,  sum alpha >= 1,  alpha >= 0."""
    n = mats.n
    A = np.hstack([mats.lam.T, np.ones((n + 1, 1))])
    A = np.vstack([A, np.append(np.ones(n), 0.0)])
    senses = ("<=",) * (n + 1) + (">=",)
    b = np.append(mats.mu, 1.0)
    objective = np.append(np.zeros(n), 1.0)
    bounds = ((0.0, None),) * n + ((None, None),)
    return LinearProgram(objective, A, senses, b, bounds)


def solve_defender_lp(mats: GameMatrices) -> tuple[MixedStrategy, float]:
    """Optimal defender mixture over the n + 1 thresholds and the LP value.

    The value is on the shifted matrix ``Lambda``; subtract ``mats.shift`` for
    the defender's actual payoff.
    """
    sol = solve_lp(defender_lp(mats))
    beta = np.clip(sol.x[:-1], 0.0, None)
    beta /= beta.sum()
    labels = tuple(range(1, mats.n + 2))
    return MixedStrategy(labels, beta), sol.value


def solve_attacker_dual(mats: GameMatrices) -> tuple[MixedStrategy, float]:
    """Optimal attacker mixture over reward levels from the dual LP.

    The dual maximizes ``y = -(game value)``; the returned value is ``-y`` so it
    is directly comparable with :func:`solve_defender_lp`.
    """
    sol = solve_lp(attacker_lp(mats))
    alpha = np.clip(sol.x[:-1], 0.0, None)
    total = alpha.sum()
    if abs(total - 1.0) > 1e-9:
        raise SolverError(f"dual optimum has total attacker mass {total!r}, expected 1")
    alpha /= total
    labels = tuple(range(1, mats.n + 1))
    return MixedStrategy(labels, alpha), -sol.value


@dataclass(frozen=True, eq=False)
class PolyhedronVertex:
    """Vertex ``x`` of {Lambda x >= 1, x >= 0} with its tight constraints."""

    x: np.ndarray
    beta: np.ndarray
    objective: float
    tight_rows: tuple[int, ...]
    zero_coords: tuple[int, ...]


def enumerate_vertices(mats: GameMatrices, tol: float = 1e-9) -> list[PolyhedronVertex]:
    """Every vertex of the defender polyhedron, by brute force over tight sets.

    Row and coordinate indices in the result are 1-based.
    """
    n = mats.n
    d = n + 1
    if n > VERTEX_ENUM_MAX_LEVELS:
        raise InputError(f"vertex enumeration is capped at {VERTEX_ENUM_MAX_LEVELS} reward levels")
    lam = np.asarray(mats.lam)
    found: list[PolyhedronVertex] = []
    for size in range(1, min(n, d) + 1):
        for free in itertools.combinations(range(d), size):
            cols = lam[:, free]
            for rows in itertools.combinations(range(n), size):
                sub = cols[rows, :]
                if abs(np.linalg.det(sub)) < 1e-12 * max(1.0, np.abs(sub).max()) ** size:
                    continue
                xf = np.linalg.solve(sub, np.ones(size))
                if xf.min() < -tol:
                    continue
                x = np.zeros(d)
                x[list(free)] = np.clip(xf, 0.0, None)
                lhs = lam @ x
                if lhs.min() < 1.0 - tol:
                    continue
                if any(np.allclose(x, v.x, rtol=0.0, atol=tol) for v in found):
                    continue
                beta = x / x.sum()
                objective = float((lam @ beta).min() - mats.mu @ beta)
                found.append(
                    PolyhedronVertex(
                        x=x,
                        beta=beta,
                        objective=objective,
                        tight_rows=tuple(int(i) + 1 for i in np.flatnonzero(lhs <= 1.0 + tol)),
                        zero_coords=tuple(int(i) + 1 for i in np.flatnonzero(x <= tol)),
                    )
                )
    return found


def optimal_vertices(mats: GameMatrices, tol: float = 1e-9) -> list[PolyhedronVertex]:
    """Vertices whose normalized strategy attains the defender LP optimum."""
    verts = enumerate_vertices(mats)
    best = max(v.objective for v in verts)
    return [v for v in verts if v.objective >= best - tol * max(1.0, abs(best))]


def all_classifiers(spec: GameSpec) -> list[Classifier]:
    ids = spec.ids
    return [
        Classifier(frozenset(vid for b, vid in enumerate(ids) if mask >> b & 1))
        for mask in range(1 << len(ids))
    ]


def full_game_value(spec: GameSpec) -> float:
    """Defender's equilibrium payoff over every one of the 2^|V| classifiers.

    The game is solved as the zero-sum game with defender payoff ``U_D(v, c)``
    (best-response equivalent to the original), via the dense simplex.
    """
    m = len(spec.vectors)
    if m > FULL_GAME_MAX_VECTORS:
        raise InputError(f"full game enumeration is capped at {FULL_GAME_MAX_VECTORS} vectors, got {m}")
    masks = np.arange(1 << m)
    detect = ((masks[None, :] >> np.arange(m)[:, None]) & 1).astype(float)
    u_a = spec.rewards[:, None] - spec.c_d * detect
    u_d = -u_a - spec.fa_weight * (spec.noise_masses @ detect)[None, :]
    ncols = detect.shape[1]
    # maximize z s.t. z <= (U_D beta)_v, sum beta = 1
    A = np.vstack([np.hstack([-u_d, np.ones((m, 1))]), np.append(np.ones(ncols), 0.0)])
    lp = LinearProgram(
        objective=np.append(np.zeros(ncols), 1.0),
        A=A,
        senses=("<=",) * m + ("=",),
        b=np.append(np.zeros(m), 1.0),
        bounds=((0.0, None),) * ncols + ((None, None),),
    )
    return solve_lp(lp).value


@dataclass(frozen=True)
class VerificationReport:
    """Largest unilateral gains available to each player.

    ``oracle_value_gap`` is ``|U_D(alpha, beta) - LP value|`` when an LP
    oracle applies to the game, else ``None``.
    """

    attacker_residual: float
    defender_residual: float
    oracle_value_gap: float | None
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "attacker_residual": self.attacker_residual,
            "defender_residual": self.defender_residual,
            "oracle_value_gap": self.oracle_value_gap,
            "tol": self.tol,
            "passed": self.passed,
        }


def _reduced_lp_value(reduced: ReducedGame) -> float | None:
    try:
        mats = build_matrices(reduced)
    except ModelAssumptionError:
        return None
    return solve_defender_lp(mats)[1] - mats.shift


def _verify_reduced(reduced, alpha, beta, tol, with_oracle) -> VerificationReport:
    alpha = np.asarray(alpha.weights if isinstance(alpha, MixedStrategy) else alpha, dtype=float)
    beta = np.asarray(beta.weights if isinstance(beta, MixedStrategy) else beta, dtype=float)
    n = reduced.n
    if alpha.shape != (n,) or beta.shape != (n + 1,):
        raise InputError(f"expected {n} attacker and {n + 1} defender weights")
    pi = threshold_detection(beta)
    row_payoff = reduced.rewards - reduced.c_d * pi
    u_a = float(alpha @ row_payoff)
    att = float(row_payoff.max() - u_a)
    # defender payoff of threshold column j against alpha
    detect = np.zeros((n, n + 1))
    detect[:, :n] = np.tril(np.ones((n, n)))
    tail = np.append(np.cumsum(reduced.noise[::-1])[::-1], 0.0)
    col_payoff = alpha @ (reduced.c_d * detect - reduced.rewards[:, None]) - reduced.fa_weight * tail
    u_d = float(col_payoff @ beta)
    dfn = float(col_payoff.max() - u_d)
    gap = None
    if with_oracle:
        value = _reduced_lp_value(reduced)
        gap = None if value is None else abs(u_d - value)
    return VerificationReport(att, dfn, gap, tol, att <= tol and dfn <= tol)


def _verify_full(spec, alpha, beta, tol, with_oracle, defender_space) -> VerificationReport:
    alpha_vec = _alpha_vector(spec, alpha)
    pi = detection_probabilities(spec, beta)
    u_a, u_d = payoffs_from_detection(spec, alpha_vec, pi)
    att = float((spec.rewards - spec.c_d * pi).max() - u_a)
    if defender_space == "all":
        best = defender_best_response(spec, alpha)
        candidates = [best.detect]
    else:
        levels = sorted(set(spec.rewards.tolist()))
        candidates = [frozenset(v for v in spec.ids if spec.reward[v] >= t) for t in levels]
        candidates.append(frozenset())
    best_u_d = -math.inf
    for detected in candidates:
        ind = np.array([vid in detected for vid in spec.ids], dtype=float)
        best_u_d = max(best_u_d, payoffs_from_detection(spec, alpha_vec, ind)[1])
    dfn = float(best_u_d - u_d)
    gap = None
    if with_oracle:
        value = _reduced_lp_value(reduce(spec))
        if value is None and len(spec.vectors) <= FULL_GAME_MAX_VECTORS:
            value = full_game_value(spec)
        gap = None if value is None else abs(u_d - value)
    return VerificationReport(att, dfn, gap, tol, att <= tol and dfn <= tol)


def verify_ne(
    game: GameSpec | ReducedGame,
    alpha,
    beta,
    tol: float = DEFAULT_VERIFY_TOL,
    with_oracle: bool = False,
    defender_space: Literal["threshold", "all"] = "threshold",
) -> VerificationReport:
    """Certify ``(alpha, beta)`` as an equilibrium up to ``tol``.

    For a :class:`ReducedGame`, ``alpha``/``beta`` are weights over reward
    levels and over the n + 1 threshold columns.  For a :class:`GameSpec`
    they are mixtures over vector ids and over classifiers; the defender's
    deviations range over threshold classifiers unless
    ``defender_space="all"``.
    """
    if not tol > 0:
        raise InputError("verification tolerance must be positive")
    if isinstance(game, ReducedGame):
        return _verify_reduced(game, alpha, beta, tol, with_oracle)
    if isinstance(game, GameSpec):
        return _verify_full(game, alpha, beta, tol, with_oracle, defender_space)
    raise InputError(f"cannot verify strategies for {type(game).__name__}")


__all__ = [
    "AdvClassError",
    "PolyhedronVertex",
    "VerificationReport",
    "all_classifiers",
    "attacker_lp",
    "defender_lp",
    "enumerate_vertices",
    "full_game_value",
    "optimal_vertices",
    "solve_attacker_dual",
    "solve_defender_lp",
    "verify_ne",
]
