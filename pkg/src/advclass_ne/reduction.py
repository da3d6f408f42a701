"""Strategy-space reductions.

Two collapses are used by the solver:

* the defender only needs threshold classifiers on the attack reward, and
* attack vectors sharing a reward collapse into one reward level whose
  non-attacker mass is the sum of theirs.

Also here: detection-probability profiles, the nested-classifier mixture
that realises any profile, and the inverse map from a reward-level
attacker strategy back to attack vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import ConsistencyError, InputError
from .game import (
    PROB_TOL,
    Classifier,
    GameSpec,
    MixedStrategy,
    _check_probability_vector,
    check_cost,
    check_prior,
    detection_probabilities,
)

REWARD_GROUPING_TOL = 1e-9
LEVEL_SUM_TOL = 1e-10


@dataclass(frozen=True)
class ThresholdClassifier:
    """Labels ``v`` as attacker iff ``R(v) >= threshold``; ``inf`` never detects."""

    threshold: float

    def __post_init__(self):
        t = float(self.threshold)
        if math.isnan(t):
            raise InputError("threshold must not be NaN")
        object.__setattr__(self, "threshold", t)

    @classmethod
    def never(cls) -> "ThresholdClassifier":
        return cls(math.inf)

    def detects(self, reward: float) -> bool:
        return reward >= self.threshold

    def detect_set(self, spec: GameSpec) -> frozenset[str]:
        return frozenset(vid for vid in spec.ids if spec.reward[vid] >= self.threshold)

    def label(self) -> str:
        return "never" if math.isinf(self.threshold) and self.threshold > 0 else f"R>={self.threshold!r}"

    @classmethod
    def from_label(cls, label: str) -> "ThresholdClassifier":
        if label == "never":
            return cls.never()
        if not label.startswith("R>="):
            raise InputError(f"not a threshold label: {label!r}")
        try:
            return cls(float(label[3:]))
        except ValueError:
            raise InputError(f"not a threshold label: {label!r}") from None


@dataclass(frozen=True, eq=False)
class DetectionProfile:
    """Detection probability per key (vector id or reward level)."""

    keys: tuple[Hashable, ...]
    values: np.ndarray

    def __post_init__(self):
        keys = tuple(self.keys)
        vals = np.array(self.values, dtype=float).reshape(-1)
        if len(keys) != vals.size:
            raise InputError(f"{len(keys)} keys but {vals.size} values")
        if len(set(keys)) != len(keys):
            raise InputError("detection profile keys must be distinct")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0.0) or np.any(vals > 1.0):
            raise InputError("detection probabilities must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "values", vals)

    def as_dict(self) -> dict:
        return dict(zip(self.keys, self.values.tolist()))


@dataclass(frozen=True, eq=False)
class ReducedGame:
    """The reward-level game: distinct sorted rewards with threshold classifiers.

    ``levels[i]`` lists the ``(vector id, P_N mass)`` pairs collapsed into
    reward ``rewards[i]``.  Threshold column ``j < n`` detects every level
    ``>= rewards[j]``; column ``n`` never detects.
    """

    rewards: np.ndarray
    noise: np.ndarray
    p: float
    c_d: float
    c_fa: float
    levels: tuple[tuple[tuple[str, float], ...], ...] | None = None

    def __post_init__(self):
        r = np.array(self.rewards, dtype=float).reshape(-1)
        q = np.array(self.noise, dtype=float).reshape(-1)
        if r.size == 0:
            raise InputError("a reduced game needs at least one reward level")
        if r.size != q.size:
            raise InputError("rewards and noise must have the same length")
        if not np.all(np.isfinite(r)):
            raise InputError("rewards must be finite")
        if np.any(np.diff(r) <= 0.0):
            raise InputError("reward levels must be strictly increasing")
        _check_probability_vector("reduced noise", q)
        levels = self.levels
        if levels is None:
            levels = tuple(((f"r{i + 1}", float(m)),) for i, m in enumerate(q))
        else:
            levels = tuple(tuple((str(vid), float(m)) for vid, m in lvl) for lvl in levels)
            if len(levels) != r.size:
                raise InputError("back-map must have one entry per reward level")
            for i, lvl in enumerate(levels):
                if not lvl:
                    raise InputError(f"reward level {i + 1} has no originating vectors")
                if abs(math.fsum(m for _, m in lvl) - q[i]) > PROB_TOL:
                    raise InputError(f"back-map masses of level {i + 1} do not sum to its noise")
        r.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "noise", q)
        object.__setattr__(self, "p", check_prior(self.p))
        object.__setattr__(self, "c_d", check_cost("c_d", self.c_d))
        object.__setattr__(self, "c_fa", check_cost("c_fa", self.c_fa))
        object.__setattr__(self, "levels", levels)

    @property
    def n(self) -> int:
        return int(self.rewards.size)

    @property
    def fa_weight(self) -> float:
        return (1.0 - self.p) / self.p * self.c_fa

    @property
    def proportional_factor(self) -> float:
        """(1 - p) / p * c_fa / c_d, the attacker's interior mixing factor."""
        return self.fa_weight / self.c_d

    def thresholds(self) -> tuple[ThresholdClassifier, ...]:
        return tuple(ThresholdClassifier(r) for r in self.rewards) + (ThresholdClassifier.never(),)

    def threshold_labels(self) -> tuple[str, ...]:
        return tuple(t.label() for t in self.thresholds())

    def level_labels(self) -> tuple[str, ...]:
        return tuple(repr(float(r)) for r in self.rewards)

    def vector_ids(self) -> tuple[str, ...]:
        return tuple(vid for lvl in self.levels for vid, _ in lvl)

    def replace(self, **changes) -> "ReducedGame":
        fields = dict(
            rewards=self.rewards, noise=self.noise, p=self.p, c_d=self.c_d,
            c_fa=self.c_fa, levels=self.levels,
        )
        fields.update(changes)
        return ReducedGame(**fields)

    def to_spec(self) -> GameSpec:
        """A full game whose vectors are the back-map entries."""
        ids, rewards, noise = [], [], []
        for r, lvl in zip(self.rewards, self.levels):
            for vid, m in lvl:
                ids.append(vid)
                rewards.append(float(r))
                noise.append(m)
        return GameSpec.from_arrays(rewards, noise, self.p, self.c_d, self.c_fa, ids=ids)


def threshold_detection(beta: np.ndarray) -> np.ndarray:
    """pi_d per reward level for weights over the n + 1 threshold columns."""
    beta = np.asarray(beta, dtype=float)
    return np.minimum(np.cumsum(beta[:-1]), 1.0)


def detection_profile(beta: MixedStrategy, domain: GameSpec | ReducedGame) -> DetectionProfile:
    """Probability of detection of every vector (or reward level) under ``beta``.

    Against a :class:`GameSpec` any classifier labels are accepted and the
    profile is keyed by vector id.  Against a :class:`ReducedGame` the labels
    must be :class:`ThresholdClassifier` and the profile is keyed by reward
    level: the mass of all thresholds at or below that level.
    """
    if isinstance(domain, GameSpec):
        return DetectionProfile(domain.ids, np.clip(detection_probabilities(domain, beta), 0.0, 1.0))
    values = np.zeros(domain.n)
    for label, w in zip(beta.labels, beta.weights):
        if not isinstance(label, ThresholdClassifier):
            raise InputError(f"reduced-game strategies must be thresholds, got {label!r}")
        values += w * (domain.rewards >= label.threshold)
    return DetectionProfile(tuple(domain.rewards.tolist()), np.clip(values, 0.0, 1.0))


def mixture_from_profile(target: DetectionProfile) -> MixedStrategy:
    """Nested-classifier mixture whose detection profile equals ``target``.

    Keys are sorted by target value; the classifier detecting the i-th key
    and everything after it gets the increment of the target at that key,
    and detect-none receives whatever is left.
    """
    order = sorted(range(len(target.keys)), key=lambda i: (target.values[i], i))
    keys = [target.keys[i] for i in order]
    vals = np.array([target.values[i] for i in order])
    increments = np.diff(np.concatenate(([0.0], vals, [1.0])))
    labels = [Classifier(frozenset(keys[i:])) for i in range(len(keys))]
    labels.append(Classifier.detect_none())
    return MixedStrategy(tuple(labels), increments)


def _same_level(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def reduce(spec: GameSpec, rel_tol: float = REWARD_GROUPING_TOL) -> ReducedGame:
    """Collapse equal-reward vectors into reward levels (ascending).

    Rewards within ``rel_tol`` (relative, floored at 1 in absolute terms) of
    the smallest reward of the current level join that level.
    """
    order = sorted(range(len(spec.vectors)), key=lambda i: (spec.rewards[i], i))
    rewards: list[float] = []
    groups: list[list[tuple[str, float]]] = []
    for i in order:
        r = float(spec.rewards[i])
        vid = spec.vectors[i].id
        if rewards and _same_level(rewards[-1], r, rel_tol):
            groups[-1].append((vid, spec.noise[vid]))
        else:
            rewards.append(r)
            groups.append([(vid, spec.noise[vid])])
    # input masses sum to 1 only within tolerance; keep each level a probability
    noise = [min(math.fsum(m for _, m in g), 1.0) for g in groups]
    return ReducedGame(
        rewards=np.array(rewards),
        noise=np.array(noise),
        p=spec.p,
        c_d=spec.c_d,
        c_fa=spec.c_fa,
        levels=tuple(tuple(g) for g in groups),
    )


def expand_alpha(
    reduced: ReducedGame,
    alpha_r: MixedStrategy | Sequence[float] | np.ndarray,
    profile: DetectionProfile | Sequence[float] | np.ndarray,
) -> MixedStrategy:
    """Lift a reward-level attacker strategy to a strategy over attack vectors.

    Levels detected with probability strictly between 0 and 1 must carry the
    proportional mass ``(1-p)/p * c_fa/c_d * P_N(v)`` on each member; a level
    whose mass disagrees by more than 1e-10 raises :class:`ConsistencyError`.
    Levels detected with probability 0 or 1 split their mass in proportion
    to ``P_N`` (uniformly if the level carries no noise mass).
    """
    a = np.asarray(alpha_r.weights if isinstance(alpha_r, MixedStrategy) else alpha_r, dtype=float)
    pi = np.asarray(profile.values if isinstance(profile, DetectionProfile) else profile, dtype=float)
    if a.size != reduced.n or pi.size != reduced.n:
        raise InputError("alpha and profile must have one entry per reward level")
    ids: list[str] = []
    weights: list[float] = []
    for i, lvl in enumerate(reduced.levels):
        masses = np.array([m for _, m in lvl])
        level_mass = masses.sum()
        interior = PROB_TOL < pi[i] < 1.0 - PROB_TOL
        if interior:
            prop = reduced.fa_weight / reduced.c_d * masses
            if abs(prop.sum() - a[i]) > LEVEL_SUM_TOL:
                raise ConsistencyError(
                    f"level {i + 1} (reward {reduced.rewards[i]!r}) is detected with probability "
                    f"{pi[i]!r} but carries attacker mass {a[i]!r}, expected {prop.sum()!r}"
                )
        if len(lvl) == 1:
            share = a[i:i + 1]
        elif level_mass > 0.0:
            share = a[i] * masses / level_mass
        else:
            share = np.full(len(lvl), a[i] / len(lvl))
        ids.extend(vid for vid, _ in lvl)
        weights.extend(share.tolist())
    return MixedStrategy(tuple(ids), np.array(weights))
