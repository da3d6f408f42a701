"""Game definition, payoff evaluation and one-shot best responses.

The attacker picks an attack vector ``v``; the defender picks a classifier,
i.e. the set of vectors she labels as "attacker".  Payoffs:

    U_A(v, c) = R(v) - c_d * [v in c]
    U_D(v, c) = -U_A(v, c) - (1 - p) / p * c_fa * P_N(c)

where ``P_N(c)`` is the non-attacker mass falling inside the detect set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ModelAssumptionError

PROB_TOL = 1e-12
# relative agreement demanded between the bilinear and detection-profile payoff paths
PAYOFF_PATH_TOL = 1e-10


@dataclass(frozen=True)
class AttackVector:
    id: str
    features: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise InputError(f"attack vector id must be a non-empty string, got {self.id!r}")
        feats = tuple(self.features)
        if len(feats) < 1:
            raise InputError(f"attack vector {self.id!r} needs at least one feature")
        for f in feats:
            if isinstance(f, bool) or not isinstance(f, (int, np.integer)):
                raise InputError(f"attack vector {self.id!r}: features must be integers, got {f!r}")
        object.__setattr__(self, "features", tuple(int(f) for f in feats))


def _check_probability_vector(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise InputError(f"{name}: entries must be finite")
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise InputError(f"{name}: entries must lie in [0, 1]")
    total = math.fsum(values.tolist())
    if abs(total - 1.0) > PROB_TOL:
        raise InputError(f"{name}: entries sum to {total!r}, expected 1 within {PROB_TOL:g}")


def check_prior(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 0.0 or p > 1.0:
        raise InputError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        raise ModelAssumptionError(
            f"p={p!r}: the false-alarm scaling (1-p)/p requires 0 < p < 1",
            assumption="0 < p < 1",
        )
    return p


def check_cost(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise InputError(f"{name} must be a finite nonnegative real, got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Full classification game: vectors, rewards, non-attacker law and costs.

    ``reward`` and ``noise`` are keyed by attack-vector id.  Instances are
    immutable; arrays exposed by the accessors are read-only and follow the
    order of ``vectors``.
    """

    vectors: tuple[AttackVector, ...]
    reward: Mapping[str, float]
    noise: Mapping[str, float]
    p: float
    c_d: float
    c_fa: float
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        vectors = tuple(self.vectors)
        if not vectors:
            raise InputError("a game needs at least one attack vector")
        index: dict[str, int] = {}
        dim = len(vectors[0].features)
        for i, v in enumerate(vectors):
            if v.id in index:
                raise InputError(f"duplicate attack vector id {v.id!r}")
            if len(v.features) != dim:
                raise InputError(
                    f"attack vector {v.id!r} has {len(v.features)} features, expected {dim}"
                )
            index[v.id] = i
        for name, mapping in (("reward", self.reward), ("noise", self.noise)):
            missing = [v.id for v in vectors if v.id not in mapping]
            if missing:
                raise InputError(f"{name} missing for vectors {missing}")
            extra = sorted(set(mapping) - set(index))
            if extra:
                raise InputError(f"{name} given for unknown vectors {extra}")
        rewards = np.array([float(self.reward[v.id]) for v in vectors])
        if not np.all(np.isfinite(rewards)) or np.any(rewards < 0.0):
            raise InputError("rewards must be finite and nonnegative")
        noise = np.array([float(self.noise[v.id]) for v in vectors])
        _check_probability_vector("noise", noise)
        rewards.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "reward", {v.id: float(r) for v, r in zip(vectors, rewards)})
        object.__setattr__(self, "noise", {v.id: float(q) for v, q in zip(vectors, noise)})
        object.__setattr__(self, "p", check_prior(self.p))
        object.__setattr__(self, "c_d", check_cost("c_d", self.c_d))
        object.__setattr__(self, "c_fa", check_cost("c_fa", self.c_fa))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_rewards", rewards)
        object.__setattr__(self, "_noise", noise)

    @classmethod
    def from_arrays(
        cls,
        rewards: Sequence[float],
        noise: Sequence[float],
        p: float,
        c_d: float,
        c_fa: float,
        ids: Sequence[str] | None = None,
        features: Sequence[Sequence[int]] | None = None,
    ) -> "GameSpec":
        n = len(rewards)
        if len(noise) != n:
            raise InputError("rewards and noise must have the same length")
        ids = list(ids) if ids is not None else [f"v{i + 1}" for i in range(n)]
        features = list(features) if features is not None else [(i,) for i in range(n)]
        vectors = tuple(AttackVector(i, tuple(f)) for i, f in zip(ids, features))
        return cls(
            vectors=vectors,
            reward=dict(zip(ids, map(float, rewards))),
            noise=dict(zip(ids, map(float, noise))),
            p=p,
            c_d=c_d,
            c_fa=c_fa,
        )

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vectors)

    @property
    def rewards(self) -> np.ndarray:
        return self._rewards

    @property
    def noise_masses(self) -> np.ndarray:
        return self._noise

    @property
    def fa_weight(self) -> float:
        """The false-alarm coefficient (1 - p) / p * c_fa."""
        return (1.0 - self.p) / self.p * self.c_fa

    def index_of(self, vector_id: str) -> int:
        try:
            return self._index[vector_id]
        except KeyError:
            raise InputError(f"unknown attack vector id {vector_id!r}") from None

    def vector(self, vector_id: str) -> AttackVector:
        return self.vectors[self.index_of(vector_id)]


@dataclass(frozen=True)
class Classifier:
    """A deterministic classifier, stored as its preimage of the attacker label."""

    detect: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "detect", frozenset(self.detect))

    @classmethod
    def detect_all(cls, spec: GameSpec) -> "Classifier":
        return cls(frozenset(spec.ids))

    @classmethod
    def detect_none(cls) -> "Classifier":
        return cls(frozenset())

    def detect_set(self, spec: GameSpec) -> frozenset[str]:
        unknown = self.detect - set(spec.ids)
        if unknown:
            raise InputError(f"classifier detects unknown vectors {sorted(unknown)}")
        return self.detect

    def label(self) -> str:
        return "{" + ",".join(sorted(self.detect)) + "}"


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability weights over an ordered tuple of distinct strategy labels."""

    labels: tuple[Hashable, ...]
    weights: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(labels) != w.size:
            raise InputError(f"{len(labels)} labels but {w.size} weights")
        if len(set(labels)) != len(labels):
            raise InputError("strategy labels must be distinct")
        if not np.all(np.isfinite(w)) or np.any(w < -PROB_TOL):
            raise InputError("mixed strategy weights must be finite and nonnegative")
        w = np.clip(w, 0.0, None)
        total = math.fsum(w.tolist())
        if abs(total - 1.0) > PROB_TOL:
            raise InputError(f"mixed strategy weights sum to {total!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", w)

    @classmethod
    def pure(cls, label: Hashable) -> "MixedStrategy":
        return cls((label,), np.ones(1))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Hashable, float]) -> "MixedStrategy":
        return cls(tuple(mapping), np.array(list(mapping.values()), dtype=float))

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.weights.tolist()))

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.weights, other.weights)

    __hash__ = None


def _alpha_vector(spec: GameSpec, alpha: MixedStrategy) -> np.ndarray:
    """Scatter an attacker mixture onto the spec's vector order."""
    out = np.zeros(len(spec.vectors))
    for label, w in zip(alpha.labels, alpha.weights):
        if isinstance(label, AttackVector):
            label = label.id
        out[spec.index_of(label)] += w
    return out


def _detect_matrix(spec: GameSpec, labels: Iterable) -> np.ndarray:
    """Boolean matrix, rows = vectors, columns = classifiers."""
    cols = []
    for c in labels:
        if not hasattr(c, "detect_set"):
            raise InputError(f"defender strategy label {c!r} is not a classifier")
        detected = c.detect_set(spec)
        cols.append([vid in detected for vid in spec.ids])
    return np.array(cols, dtype=bool).T.reshape(len(spec.vectors), -1)


def detection_probabilities(spec: GameSpec, beta: MixedStrategy) -> np.ndarray:
    """pi_d(v) = sum_c beta_c [v in c], in the spec's vector order."""
    return _detect_matrix(spec, beta.labels).astype(float) @ beta.weights


def pure_payoffs(spec: GameSpec, v: str | AttackVector, c: Classifier) -> tuple[float, float]:
    vid = v.id if isinstance(v, AttackVector) else v
    i = spec.index_of(vid)
    detected = c.detect_set(spec)
    u_a = spec.rewards[i] - spec.c_d * (vid in detected)
    false_alarm = math.fsum(spec.noise[w] for w in detected)
    u_d = -u_a - spec.fa_weight * false_alarm
    return float(u_a), float(u_d)


def payoffs_from_detection(
    spec: GameSpec, alpha_vec: np.ndarray, pi_d: np.ndarray
) -> tuple[float, float]:
    """Payoffs computed only through the detection probabilities."""
    u_a = float(alpha_vec @ (spec.rewards - spec.c_d * pi_d))
    u_d = -u_a - spec.fa_weight * float(spec.noise_masses @ pi_d)
    return u_a, u_d


def bilinear_payoffs(
    spec: GameSpec, alpha_vec: np.ndarray, beta: MixedStrategy
) -> tuple[float, float]:
    """Double sum over (vector, classifier) pairs of the pure payoffs."""
    detect = _detect_matrix(spec, beta.labels)
    u_a_matrix = spec.rewards[:, None] - spec.c_d * detect
    false_alarm = spec.noise_masses @ detect
    u_d_matrix = -u_a_matrix - spec.fa_weight * false_alarm[None, :]
    return (
        float(alpha_vec @ u_a_matrix @ beta.weights),
        float(alpha_vec @ u_d_matrix @ beta.weights),
    )


def mixed_payoffs(
    spec: GameSpec, alpha: MixedStrategy, beta: MixedStrategy
) -> tuple[float, float]:
    """Expected (attacker, defender) payoffs of a mixed strategy pair.

    Computed from the full bilinear form and cross-checked against the
    detection-probability form; a disagreement means a bug, not bad input.
    """
    alpha_vec = _alpha_vector(spec, alpha)
    bil = bilinear_payoffs(spec, alpha_vec, beta)
    via_pd = payoffs_from_detection(spec, alpha_vec, detection_probabilities(spec, beta))
    for a, b in zip(bil, via_pd):
        if abs(a - b) > PAYOFF_PATH_TOL * max(1.0, abs(a), abs(b)):
            raise AssertionError(f"payoff paths disagree: {bil} vs {via_pd}")
    return bil


def defender_best_response(spec: GameSpec, alpha: MixedStrategy) -> Classifier:
    """Best classifier against ``alpha`` over all 2^|V| classifiers.

    U_D is separable in the detect set: including ``v`` changes it by
    ``c_d * alpha_v - fa_weight * P_N(v)``.  Vectors with a zero (within
    1e-12) marginal gain are left undetected.
    """
    alpha_vec = _alpha_vector(spec, alpha)
    gain = spec.c_d * alpha_vec - spec.fa_weight * spec.noise_masses
    return Classifier(frozenset(vid for vid, g in zip(spec.ids, gain) if g > PROB_TOL))


def attacker_best_response(spec: GameSpec, beta: MixedStrategy) -> AttackVector:
    """Best attack vector against ``beta``.

    Ties are broken toward the lowest reward, then toward the vector listed
    first in the spec.
    """
    payoff = spec.rewards - spec.c_d * detection_probabilities(spec, beta)
    best = payoff.max()
    candidates = [i for i in range(len(payoff)) if payoff[i] >= best - PROB_TOL * max(1.0, abs(best))]
    i = min(candidates, key=lambda j: (spec.rewards[j], j))
    return spec.vectors[i]
