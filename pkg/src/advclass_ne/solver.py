"""Closed-form computation of every equilibrium of the reward-level game.

Indices ``s`` and ``k`` are 1-based reward-level indices throughout the
public API (level 1 is the smallest reward), matching the threshold column
numbering; arrays are 0-based as usual.

The defender's equilibrium strategies are the optimal vertices of her
maximin LP.  Those vertices come in two shapes, both determined by the
first tight level ``s``:

* type 1 puts the leftover mass on threshold ``s`` (never-classify gets 0),
* type 2 puts it on never-classify (threshold ``s`` gets 0),

with thresholds ``s+1 .. n`` weighted by ``(r_i - r_{i-1}) / c_d``.  The
sweep below scores every candidate and dispatches on which shapes win.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, ModelAssumptionError, SolverError
from .game import PROB_TOL, MixedStrategy
from .reduction import ReducedGame, ThresholdClassifier, threshold_detection

DEFAULT_EPSILON = 1.0
TIE_TOL = 1e-9
VALUE_AGREEMENT_TOL = 1e-10


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def tie_compare(u1: float, u2: float, tol: float = TIE_TOL) -> Ordering:
    """Compare two payoffs, calling them equal within ``tol`` relative (floored at 1)."""
    if not tol > 0:
        raise InputError("tie tolerance must be positive")
    if abs(u1 - u2) <= tol * max(1.0, abs(u1), abs(u2)):
        return Ordering.EQUAL
    return Ordering.GREATER if u1 > u2 else Ordering.LESS


@dataclass(frozen=True, eq=False)
class GameMatrices:
    """Attacker cost matrices and the defender's false-alarm penalties.

    ``lambda_tilde[i, j] = c_d [r_i >= r_j] - r_i`` with column ``n`` the
    never-classify threshold; ``lam`` shifts it by ``r_max + epsilon`` so every
    entry is positive.  ``mu[j]`` is the expected false-alarm penalty of
    threshold column ``j`` (``mu[n] = 0``).
    """

    lambda_tilde: np.ndarray
    lam: np.ndarray
    epsilon: float
    mu: np.ndarray

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    @property
    def shift(self) -> float:
        return float(self.lam[0, 0] - self.lambda_tilde[0, 0])

    @property
    def lambda_eq(self) -> np.ndarray:
        """Cost matrix of the best-response-equivalent zero-sum game."""
        return self.lam - self.mu[None, :]


def check_solvable(reduced: ReducedGame) -> None:
    """Raise :class:`ModelAssumptionError` unless the closed form applies."""
    if reduced.c_d <= 0.0:
        raise ModelAssumptionError("the closed-form solver needs c_d > 0", assumption="c_d > 0")
    zero = np.flatnonzero(reduced.noise <= 0.0)
    if zero.size:
        levels = ", ".join(repr(float(reduced.rewards[i])) for i in zero)
        raise ModelAssumptionError(
            f"reward level(s) {levels} carry zero non-attacker mass, so the false-alarm "
            "penalty vector is not strictly decreasing; use oracle.full_game_value for such games",
            assumption="strictly decreasing false-alarm penalty (positive noise at every reward level)",
        )


def build_matrices(reduced: ReducedGame, epsilon: float = DEFAULT_EPSILON) -> GameMatrices:
    epsilon = float(epsilon)
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InputError(f"epsilon must be a positive real, got {epsilon!r}")
    check_solvable(reduced)
    r = reduced.rewards
    n = reduced.n
    detect = np.zeros((n, n + 1))
    detect[:, :n] = np.tril(np.ones((n, n)))
    lambda_tilde = reduced.c_d * detect - r[:, None]
    lam = lambda_tilde + (r[-1] + epsilon)
    tail = np.cumsum(reduced.noise[::-1])[::-1]
    mu = np.append(reduced.fa_weight * tail, 0.0)
    for a in (lambda_tilde, lam, mu):
        a.setflags(write=False)
    return GameMatrices(lambda_tilde=lambda_tilde, lam=lam, epsilon=epsilon, mu=mu)


def _row_costs(reduced: ReducedGame, beta: np.ndarray) -> np.ndarray:
    """Lambda_tilde @ beta, using the cumulative-detection form (O(n))."""
    return reduced.c_d * threshold_detection(beta) - reduced.rewards * beta.sum()


def defender_objective(reduced: ReducedGame, mats: GameMatrices, beta: np.ndarray) -> float:
    """``min[Lambda beta] - mu' beta``: the defender's guaranteed (shifted) payoff."""
    return float(_row_costs(reduced, beta).min() + mats.shift * beta.sum() - mats.mu @ beta)


def compute_beta(
    reduced: ReducedGame,
    s: int,
    type: int,
    mats: GameMatrices | None = None,
) -> tuple[np.ndarray | None, float]:
    """Candidate defender vertex of the given type starting at level ``s``.

    Returns ``(None, -inf)`` when the candidate is infeasible: negative
    leftover mass, or (type 1, ``s > 1``) a leftover on threshold ``s`` that
    would make level ``s - 1`` cheaper for the attacker than level ``s``.
    """
    n = reduced.n
    if not 1 <= s <= n:
        raise InputError(f"start index s={s} outside 1..{n}")
    if type not in (1, 2):
        raise InputError(f"vertex type must be 1 or 2, got {type!r}")
    if mats is None:
        mats = build_matrices(reduced)
    r = reduced.rewards
    beta = np.zeros(n + 1)
    beta[s:n] = np.diff(r)[s - 1:] / reduced.c_d
    remainder = 1.0 - math.fsum(beta[s:n].tolist())
    if remainder < -PROB_TOL:
        return None, -math.inf
    remainder = max(remainder, 0.0)
    if type == 1:
        if s > 1 and remainder > (r[s - 1] - r[s - 2]) / reduced.c_d + PROB_TOL:
            return None, -math.inf
        beta[s - 1] = remainder
    else:
        beta[n] = remainder
    return beta, defender_objective(reduced, mats, beta)


def reduced_payoffs(reduced: ReducedGame, alpha: np.ndarray, beta: np.ndarray) -> tuple[float, float]:
    """(attacker, defender) expected payoffs in the reward-level game (unshifted)."""
    pi = threshold_detection(beta)
    u_a = float(alpha @ (reduced.rewards - reduced.c_d * pi))
    u_d = -u_a - reduced.fa_weight * float(reduced.noise @ pi)
    return u_a, u_d


@dataclass(frozen=True, eq=False)
class EquilibriumSet:
    """All equilibria of a reward-level game.

    The equilibrium set is the product of the convex hulls of
    ``beta_vertices`` (weights over the ``n + 1`` thresholds) and
    ``alpha_vertices`` (weights over the ``n`` reward levels).
    ``defender_value`` is the defender's payoff, common to every
    equilibrium; ``lp_value`` is the same quantity on the shifted matrix.
    """

    reduced: ReducedGame
    case: str
    k: int
    beta_vertices: tuple[np.ndarray, ...]
    alpha_vertices: tuple[np.ndarray, ...]
    defender_value: float
    lp_value: float
    attacker_payoff_range: tuple[float, float]
    epsilon: float

    @property
    def singleton(self) -> bool:
        return len(self.beta_vertices) == 1 and len(self.alpha_vertices) == 1

    @property
    def beta(self) -> np.ndarray:
        return self.beta_vertices[0]

    @property
    def alpha(self) -> np.ndarray:
        return self.alpha_vertices[0]

    def beta_strategy(self, i: int = 0) -> MixedStrategy:
        return MixedStrategy(self.reduced.thresholds(), self.beta_vertices[i])

    def alpha_strategy(self, i: int = 0) -> MixedStrategy:
        return MixedStrategy(tuple(self.reduced.rewards.tolist()), self.alpha_vertices[i])

    def combination(self, alpha_weights: Sequence[float], beta_weights: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """A member of the equilibrium set given convex weights over the vertices."""
        aw = np.asarray(alpha_weights, float)
        bw = np.asarray(beta_weights, float)
        return aw @ np.array(self.alpha_vertices), bw @ np.array(self.beta_vertices)


def compute_alpha(reduced: ReducedGame, k: int, beta_vertices: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Attacker equilibrium strategies matching defender vertices starting at ``k``.

    Levels strictly inside the defender's support mimic the non-attacker
    (``factor * P_N(r_i)``); the two boundary levels share the rest
    depending on where the defender's leftover mass sits.  Returns one
    vertex, or two when the defender leaves no mass on either boundary; in
    that case ``alpha_k`` ranges over ``[0, min(prop_k, 1 - interior - prop_n)]``.
    """
    n = reduced.n
    if k == n:
        alpha = np.zeros(n)
        alpha[-1] = 1.0
        return [alpha]
    factor = reduced.proportional_factor
    prop = factor * reduced.noise
    base = np.zeros(n)
    base[k:n - 1] = prop[k:n - 1]
    interior = math.fsum(base.tolist())
    boundary_k = any(b[k - 1] > PROB_TOL for b in beta_vertices)
    boundary_never = any(b[n] > PROB_TOL for b in beta_vertices)
    if boundary_k:
        alpha = base.copy()
        alpha[k - 1] = prop[k - 1]
        alpha[n - 1] = 1.0 - interior - prop[k - 1]
        vertices = [alpha]
    elif boundary_never:
        alpha = base.copy()
        alpha[n - 1] = prop[n - 1]
        alpha[k - 1] = 1.0 - interior - prop[n - 1]
        vertices = [alpha]
    else:
        # never-classify must stay a best response, which needs alpha_n >= prop_n
        vertices = []
        for a_k in (0.0, min(prop[k - 1], 1.0 - interior - prop[n - 1])):
            alpha = base.copy()
            alpha[k - 1] = a_k
            alpha[n - 1] = 1.0 - interior - a_k
            vertices.append(alpha)
        if np.allclose(vertices[0], vertices[1], rtol=0.0, atol=PROB_TOL):
            vertices = vertices[:1]
    for a in vertices:
        if a.min() < -1e-9:
            raise SolverError(f"attacker strategy has negative weight {a.min()!r} (k={k})")
        np.clip(a, 0.0, None, out=a)
    return vertices


def _maximizers(values: dict[int, float], best: float, tol: float) -> list[int]:
    return sorted(s for s, u in values.items() if tie_compare(u, best, tol) == Ordering.EQUAL)


def compute_all_ne(
    reduced: ReducedGame,
    epsilon: float = DEFAULT_EPSILON,
    tol: float = TIE_TOL,
) -> EquilibriumSet:
    """Every Nash equilibrium of the reward-level game, in closed form.

    Scores all type-1 and type-2 candidates, then dispatches on how the best
    type-1 payoff compares with the best type-2 payoff and on whether the
    best type-2 start index is unique.  The resulting ``case`` is one of:

    ``"i"``   unique equilibrium, leftover on threshold ``k``;
    ``"ii"``  unique equilibrium, leftover on never-classify;
    ``"iii"`` unique defender strategy with no leftover, attacker segment;
    ``"iv"``  defender segment between two vertices, unique attacker strategy.
    """
    mats = build_matrices(reduced, epsilon)
    n = reduced.n
    cand = {1: {}, 2: {}}
    for s in range(1, n + 1):
        for t in (1, 2):
            beta, u = compute_beta(reduced, s, t, mats)
            if beta is not None:
                cand[t][s] = (beta, u)
    if not cand[1] or not cand[2]:
        raise SolverError("no feasible candidate of some type; input violates the model")
    u1_by_s = {s: u for s, (_, u) in cand[1].items()}
    u2_by_s = {s: u for s, (_, u) in cand[2].items()}
    u1 = max(u1_by_s.values())
    u2 = max(u2_by_s.values())
    s1 = _maximizers(u1_by_s, u1, tol)[0]
    s2 = _maximizers(u2_by_s, u2, tol)
    if len(s2) > 2 or (len(s2) == 2 and s2[1] != s2[0] + 1):
        raise SolverError(f"type-2 maximizers {s2} are not a single index or an adjacent pair")

    order = tie_compare(u1, u2, tol)
    if order == Ordering.GREATER:
        case, k = "i", s1
        betas = [cand[1][s1][0]]
    elif order == Ordering.LESS:
        if len(s2) == 1:
            case, k = "ii", s2[0]
            betas = [cand[2][s2[0]][0]]
        else:
            case, k = "iv", s2[1]
            betas = [cand[2][s2[0]][0], cand[2][s2[1]][0]]
    elif len(s2) == 1:
        if s2[0] != s1:
            raise SolverError(f"tied optimal vertices start at different levels ({s1}, {s2[0]})")
        b1, b2 = cand[1][s1][0], cand[2][s1][0]
        k = s1
        if np.allclose(b1, b2, rtol=0.0, atol=PROB_TOL):
            case, betas = "iii", [b1]
        else:
            case, betas = "iv", [b1, b2]
    else:
        sa, sb = s2
        if sa != s1:
            raise SolverError(f"type-1 optimum at {s1} does not coincide with type-2 optimum at {sa}")
        if not np.allclose(cand[1][sa][0], cand[2][sa][0], rtol=0.0, atol=PROB_TOL):
            raise SolverError("three optimal defender vertices; the model admits at most two")
        case, k = "iv", sb
        betas = [cand[1][sa][0], cand[2][sb][0]]

    alphas = compute_alpha(reduced, k, betas)

    values = [defender_objective(reduced, mats, b) for b in betas]
    lp_value = max(values)
    if max(values) - min(values) > VALUE_AGREEMENT_TOL * max(1.0, abs(lp_value)):
        raise SolverError(f"defender vertices disagree on the game value: {values}")
    defender_value = lp_value - mats.shift
    attacker_payoffs = [reduced_payoffs(reduced, a, b)[0] for a in alphas for b in betas]
    return EquilibriumSet(
        reduced=reduced,
        case=case,
        k=k,
        beta_vertices=tuple(betas),
        alpha_vertices=tuple(alphas),
        defender_value=float(defender_value),
        lp_value=float(lp_value),
        attacker_payoff_range=(min(attacker_payoffs), max(attacker_payoffs)),
        epsilon=mats.epsilon,
    )


def threshold_mixture(reduced: ReducedGame, beta: np.ndarray) -> MixedStrategy:
    """Wrap threshold weights as a mixture over :class:`ThresholdClassifier`."""
    return MixedStrategy(reduced.thresholds(), beta)


__all__ = [
    "GameMatrices",
    "EquilibriumSet",
    "Ordering",
    "ThresholdClassifier",
    "build_matrices",
    "compute_alpha",
    "compute_all_ne",
    "compute_beta",
    "defender_objective",
    "reduced_payoffs",
    "threshold_mixture",
    "tie_compare",
]
