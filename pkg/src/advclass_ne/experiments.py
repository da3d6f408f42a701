"""Numerical experiments: binomial-noise games, parameter sweeps and the
two-feature portscan study.

Everything here is built from the public solver/oracle API; no new
equilibrium logic lives in this module.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AdvClassError, InputError, ModelAssumptionError
from .game import (
    Classifier,
    GameSpec,
    MixedStrategy,
    attacker_best_response,
    check_cost,
    defender_best_response,
    mixed_payoffs,
)
from .oracle import DEFAULT_VERIFY_TOL, verify_ne
from .reduction import ReducedGame, expand_alpha, reduce, threshold_detection
from .solver import DEFAULT_EPSILON, TIE_TOL, EquilibriumSet, compute_all_ne, threshold_mixture

THREADS_ENV = "ADVCLASS_NE_THREADS"
SWEEP_PARAMETERS = ("c_a", "c_fa", "c_d", "p", "theta0")


@dataclass(frozen=True)
class BinomialNoiseSpec:
    """Non-attacker hits the target ``i`` times out of ``N``; reward ``i * c_a``."""

    N: int
    theta0: float
    c_a: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise InputError(f"N must be a positive integer, got {self.N!r}")
        theta = float(self.theta0)
        if theta in (0.0, 1.0):
            raise ModelAssumptionError(
                f"theta0={theta!r} puts zero non-attacker mass on some reward levels",
                assumption="strictly decreasing false-alarm penalty (positive noise at every reward level)",
            )
        if not 0.0 < theta < 1.0:
            raise InputError(f"theta0 must lie in (0, 1), got {self.theta0!r}")
        c_a = float(self.c_a)
        if not (math.isfinite(c_a) and c_a > 0.0):
            raise InputError(f"c_a must be a positive real, got {self.c_a!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "theta0", theta)
        object.__setattr__(self, "c_a", c_a)


def binomial_pmf(N: int, theta: float) -> np.ndarray:
    """Binomial(N, theta) pmf via pmf(k+1) = pmf(k) * (N-k)/(k+1) * theta/(1-theta)."""
    odds = theta / (1.0 - theta)
    pmf = np.empty(N + 1)
    pmf[0] = (1.0 - theta) ** N
    for k in range(N):
        pmf[k + 1] = pmf[k] * (N - k) / (k + 1) * odds
    return pmf


def binomial_game(noise: BinomialNoiseSpec, p: float, c_d: float, c_fa: float) -> ReducedGame:
    """Reward levels ``0, c_a, ..., N c_a`` with binomial non-attacker mass."""
    pmf = binomial_pmf(noise.N, noise.theta0)
    if pmf.min() <= 0.0:
        raise ModelAssumptionError(
            f"binomial pmf underflows to zero for N={noise.N}, theta0={noise.theta0!r}",
            assumption="strictly decreasing false-alarm penalty (positive noise at every reward level)",
        )
    rewards = noise.c_a * np.arange(noise.N + 1)
    levels = tuple(((f"k{i}", float(m)),) for i, m in enumerate(pmf))
    return ReducedGame(rewards=rewards, noise=pmf, p=p, c_d=c_d, c_fa=c_fa, levels=levels)


@dataclass(frozen=True)
class BinomialSetup:
    """A binomial-noise game kept in parametric form so every knob can be swept."""

    noise: BinomialNoiseSpec
    p: float
    c_d: float
    c_fa: float

    def game(self) -> ReducedGame:
        return binomial_game(self.noise, self.p, self.c_d, self.c_fa)

    def with_parameter(self, name: str, value: float) -> "BinomialSetup":
        if name in ("c_a", "theta0"):
            fields = {"N": self.noise.N, "theta0": self.noise.theta0, "c_a": self.noise.c_a}
            fields[name] = value
            return BinomialSetup(BinomialNoiseSpec(**fields), self.p, self.c_d, self.c_fa)
        if name in ("c_fa", "c_d", "p"):
            params = {"p": self.p, "c_d": self.c_d, "c_fa": self.c_fa}
            params[name] = value
            return BinomialSetup(self.noise, **params)
        raise InputError(f"unknown sweep parameter {name!r}; expected one of {SWEEP_PARAMETERS}")


def reference_setup() -> BinomialSetup:
    """The equilibrium-distribution example: 101 reward levels, c_d = 120."""
    return BinomialSetup(BinomialNoiseSpec(N=100, theta0=0.2, c_a=1.0), p=0.2, c_d=120.0, c_fa=140.0)


SweepBase = Union[BinomialSetup, ReducedGame]


@dataclass(frozen=True)
class SweepRow:
    """One grid point.  ``error`` is set (and every other result field is
    ``None``) when the point does not define a solvable game."""

    value: float
    k: int | None = None
    case: str | None = None
    attacker_payoff: float | None = None
    attacker_payoff_lo: float | None = None
    attacker_payoff_hi: float | None = None
    defender_payoff: float | None = None
    alpha_vertices: tuple[np.ndarray, ...] = ()
    beta_vertices: tuple[np.ndarray, ...] = ()
    verified: bool = False
    error: str | None = None
    equilibria: EquilibriumSet | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    rows: tuple[SweepRow, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])


def _game_at(base: SweepBase, parameter: str, value: float) -> ReducedGame:
    if isinstance(base, BinomialSetup):
        return base.with_parameter(parameter, value).game()
    if parameter in ("c_a", "theta0"):
        raise InputError(f"sweeping {parameter} needs a binomial base game")
    return base.replace(**{parameter: value})


def verify_equilibrium_set(eq: EquilibriumSet, tol: float = DEFAULT_VERIFY_TOL) -> bool:
    """True iff every (alpha vertex, beta vertex) pair passes verify_ne."""
    return all(
        verify_ne(eq.reduced, a, b, tol=tol).passed
        for a in eq.alpha_vertices
        for b in eq.beta_vertices
    )


def solve_row(
    game: ReducedGame, value: float = math.nan, epsilon: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_VERIFY_TOL,
) -> SweepRow:
    eq = compute_all_ne(game, epsilon=epsilon, tol=TIE_TOL)
    lo, hi = eq.attacker_payoff_range
    return SweepRow(
        value=value,
        k=eq.k,
        case=eq.case,
        attacker_payoff=lo if lo == hi else 0.5 * (lo + hi),
        attacker_payoff_lo=lo,
        attacker_payoff_hi=hi,
        defender_payoff=eq.defender_value,
        alpha_vertices=eq.alpha_vertices,
        beta_vertices=eq.beta_vertices,
        verified=verify_equilibrium_set(eq, tol),
        equilibria=eq,
    )


def thread_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def sweep(
    base: SweepBase,
    parameter: str,
    grid: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_VERIFY_TOL,
    threads: int | None = None,
) -> SweepResult:
    """Solve the game at every grid value of ``parameter``.

    Sweeping ``c_a`` regenerates the rewards ``i * c_a``; the other
    parameters keep the reward grid.  A grid value giving an invalid game
    yields a row with ``error`` set and the sweep carries on.  Rows follow
    the grid order whatever the number of worker threads.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise InputError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    if parameter in ("c_a", "theta0") and not isinstance(base, BinomialSetup):
        raise InputError(f"sweeping {parameter} needs a binomial base game")
    grid = [float(g) for g in grid]
    if not grid:
        raise InputError("sweep grid is empty")

    def run(value: float) -> SweepRow:
        try:
            return solve_row(_game_at(base, parameter, value), value, epsilon, tol)
        except AdvClassError as exc:
            return SweepRow(value=value, error=f"{type(exc).__name__}: {exc}")

    workers = min(thread_count(threads), len(grid))
    if workers == 1:
        rows = [run(v) for v in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, grid))
    return SweepResult(parameter=parameter, rows=tuple(rows))


# --- two-feature study --------------------------------------------------------

INACTIVE = ("low", "high")


@dataclass(frozen=True)
class MultiFeatureParams:
    """Feature 1: hits on the valuable server (0..N).  Feature 2: inactive-pct, low or high."""

    N: int = 2
    c_a: float = 1.0
    c_low: float = 2.0
    c_high: float = 4.1
    p: float = 0.2
    theta0: float = 0.3
    theta_low: float = 0.8
    c_d: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        BinomialNoiseSpec(self.N, self.theta0, self.c_a)
        check_cost("c_low", self.c_low)
        check_cost("c_high", self.c_high)
        t = float(self.theta_low)
        if t in (0.0, 1.0):
            raise ModelAssumptionError(
                f"theta_low={t!r} leaves one inactive-pct class without non-attacker mass",
                assumption="strictly decreasing false-alarm penalty (positive noise at every reward level)",
            )
        if not 0.0 < t < 1.0:
            raise InputError(f"theta_low must lie in (0, 1), got {self.theta_low!r}")


def vector_id(hits: int, inactive: str) -> str:
    return f"a{hits}-{inactive}"


def multi_feature_spec(params: MultiFeatureParams = MultiFeatureParams()) -> GameSpec:
    """The 2(N+1)-vector game; features are ``(hits, 1 if high inactive-pct else 0)``."""
    pmf = binomial_pmf(params.N, params.theta0)
    share = {"low": params.theta_low, "high": 1.0 - params.theta_low}
    bonus = {"low": params.c_low, "high": params.c_high}
    ids, feats, rewards, noise = [], [], [], []
    for flag, kind in enumerate(INACTIVE):
        for i in range(params.N + 1):
            ids.append(vector_id(i, kind))
            feats.append((i, flag))
            rewards.append(i * params.c_a + bonus[kind])
            noise.append(pmf[i] * share[kind])
    return GameSpec.from_arrays(rewards, noise, params.p, params.c_d, params.c_fa, ids=ids, features=feats)


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    scenario: int
    description: str
    attacker: MixedStrategy
    defender: MixedStrategy
    defender_payoff: float
    attacker_payoff: float


def _feature1_game(params: MultiFeatureParams) -> ReducedGame:
    """Attacker restricted to high inactive-pct; defender sees hits only."""
    pmf = binomial_pmf(params.N, params.theta0)
    rewards = params.c_a * np.arange(params.N + 1) + params.c_high
    return ReducedGame(rewards, pmf, params.p, params.c_d, params.c_fa)


def multi_feature_study(params: MultiFeatureParams = MultiFeatureParams()) -> list[ScenarioResult]:
    """Defender payoffs when a second feature is added, with and without the
    attacker adapting to it.

    1. both players act on feature 1 only (equilibrium);
    2. the defender best-responds with both features to the scenario-1 attacker;
    3. the attacker best-responds to the scenario-2 classifier;
    4. equilibrium of the full two-feature game.
    """
    spec = multi_feature_spec(params)
    hits = {v.id: v.features[0] for v in spec.vectors}

    g1 = _feature1_game(params)
    eq1 = compute_all_ne(g1)
    alpha1 = MixedStrategy(
        tuple(vector_id(i, "high") for i in range(params.N + 1)), eq1.alpha
    )
    # a hit-count threshold detects both inactive-pct classes
    classifiers1 = tuple(
        Classifier(frozenset(vid for vid, h in hits.items() if h >= i)) for i in range(params.N + 1)
    ) + (Classifier.detect_none(),)
    beta1 = MixedStrategy(classifiers1, eq1.beta)

    c2 = defender_best_response(spec, alpha1)
    beta2 = MixedStrategy.pure(c2)
    v3 = attacker_best_response(spec, beta2)
    alpha3 = MixedStrategy.pure(v3.id)

    reduced = reduce(spec)
    eq4 = compute_all_ne(reduced)
    beta4 = threshold_mixture(reduced, eq4.beta)
    alpha4 = expand_alpha(reduced, eq4.alpha, threshold_detection(eq4.beta))

    plays = [
        (1, "feature 1 only, equilibrium", alpha1, beta1),
        (2, "defender adds feature 2 against the scenario-1 attacker", alpha1, beta2),
        (3, "attacker best-responds to the scenario-2 classifier", alpha3, beta2),
        (4, "both features, equilibrium", alpha4, beta4),
    ]
    out = []
    for sid, desc, a, b in plays:
        u_a, u_d = mixed_payoffs(spec, a, b)
        out.append(ScenarioResult(sid, desc, a, b, u_d, u_a))
    return out


# --- random games ---------------------------------------------------------------


def random_reduced_game(rng: np.random.Generator, n_range: tuple[int, int] = (2, 8)) -> ReducedGame:
    """A random reward-level game: rewards uniform in (0, 10), positive noise,
    costs in (0.1, 10) and prior in (0.05, 0.95)."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    while True:
        rewards = np.sort(rng.uniform(0.0, 10.0, n))
        if np.all(np.diff(rewards) > 0.0) and rewards[0] > 0.0:
            break
    noise = rng.dirichlet(np.ones(n))
    noise = np.maximum(noise, 1e-6)
    noise /= noise.sum()
    return ReducedGame(
        rewards=rewards,
        noise=noise,
        p=float(rng.uniform(0.05, 0.95)),
        c_d=float(rng.uniform(0.1, 10.0)),
        c_fa=float(rng.uniform(0.1, 10.0)),
    )


@dataclass(frozen=True)
class FuzzCase:
    index: int
    n: int
    case: str
    value_gap: float
    duality_gap: float
    max_residual: float
    passed: bool


def fuzz(seed: int, count: int, tol: float = 1e-8, value_tol: float = 1e-7) -> list[FuzzCase]:
    """Compare the closed form with the LP oracle on ``count`` random games.

    Game ``i`` draws from its own generator seeded with ``seed + i``.
    """
    from .oracle import solve_attacker_dual, solve_defender_lp
    from .solver import build_matrices

    out = []
    for i in range(count):
        game = random_reduced_game(np.random.default_rng(seed + i))
        eq = compute_all_ne(game)
        mats = build_matrices(game, eq.epsilon)
        _, primal = solve_defender_lp(mats)
        _, dual = solve_attacker_dual(mats)
        value_gap = abs(eq.lp_value - primal)
        duality_gap = abs(primal - dual)
        residual = max(
            max(r.attacker_residual, r.defender_residual)
            for r in (verify_ne(game, a, b, tol=tol) for a in eq.alpha_vertices for b in eq.beta_vertices)
        )
        out.append(FuzzCase(
            i, game.n, eq.case, value_gap, duality_gap, residual,
            value_gap <= value_tol and duality_gap < 1e-9 and residual <= tol,
        ))
    return out


__all__ = [
    "BinomialNoiseSpec",
    "BinomialSetup",
    "MultiFeatureParams",
    "SWEEP_PARAMETERS",
    "ScenarioResult",
    "SweepResult",
    "SweepRow",
    "binomial_game",
    "binomial_pmf",
    "FuzzCase",
    "reference_setup",
    "fuzz",
    "random_reduced_game",
    "multi_feature_spec",
    "multi_feature_study",
    "solve_row",
    "sweep",
    "verify_equilibrium_set",
]
