"""Spec-file parsing and result serialization for the command line.

A spec file is a JSON object with the costs ``p``, ``c_d``, ``c_fa`` and
exactly one of

* ``vectors``: a list of ``{"id", "features", "reward", "noise"}`` objects, or
* ``binomial``: ``{"N", "theta0", "c_a"}``, the binomial-noise shorthand.

Floats are written with Python's shortest round-trip repr, so every value
reads back bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import InputError
from .experiments import BinomialNoiseSpec, BinomialSetup
from .game import AttackVector, GameSpec, MixedStrategy
from .reduction import ReducedGame, ThresholdClassifier, reduce


class SpecParseError(InputError):
    """Malformed spec or strategies document; ``where`` locates the problem."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True, eq=False)
class SpecFile:
    """A parsed spec file: exactly one of ``spec`` / ``binomial`` is set."""

    raw: Mapping[str, Any]
    spec: GameSpec | None = None
    binomial: BinomialSetup | None = None

    def reduced(self) -> ReducedGame:
        return self.binomial.game() if self.binomial is not None else reduce(self.spec)

    def full_spec(self) -> GameSpec:
        return self.spec if self.spec is not None else self.binomial.game().to_spec()

    def sweep_base(self):
        return self.binomial if self.binomial is not None else reduce(self.spec)


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{source} line {exc.lineno} column {exc.colno}", exc.msg) from None


def _number(obj: Mapping, key: str, where: str) -> float:
    if key not in obj:
        raise SpecParseError(f"{where}.{key}", "missing field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecParseError(f"{where}.{key}", f"expected a finite number, got {v!r}")
    return float(v)


def _check_keys(obj: Any, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SpecParseError(where, f"expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SpecParseError(where, f"unknown field(s) {extra}")


def parse_spec(text: str, source: str = "spec") -> SpecFile:
    """Parse a spec document; semantic violations surface as library errors."""
    doc = _load_json(text, source)
    _check_keys(doc, {"vectors", "binomial", "p", "c_d", "c_fa"}, source)
    has_vectors, has_binomial = "vectors" in doc, "binomial" in doc
    if has_vectors == has_binomial:
        raise SpecParseError(source, "exactly one of 'vectors' and 'binomial' is required")
    p, c_d, c_fa = (_number(doc, k, source) for k in ("p", "c_d", "c_fa"))
    if has_binomial:
        b = doc["binomial"]
        where = f"{source}.binomial"
        _check_keys(b, {"N", "theta0", "c_a"}, where)
        N = _number(b, "N", where)
        if N != int(N):
            raise SpecParseError(f"{where}.N", f"expected an integer, got {b['N']!r}")
        noise = BinomialNoiseSpec(int(N), _number(b, "theta0", where), _number(b, "c_a", where))
        setup = BinomialSetup(noise, p, c_d, c_fa)
        setup.game()  # surface model-assumption errors at load time
        return SpecFile(raw=doc, binomial=setup)
    vectors = doc["vectors"]
    if not isinstance(vectors, list) or not vectors:
        raise SpecParseError(f"{source}.vectors", "expected a non-empty list")
    vecs, reward, noise = [], {}, {}
    for i, v in enumerate(vectors):
        where = f"{source}.vectors[{i}]"
        _check_keys(v, {"id", "features", "reward", "noise"}, where)
        vid = v.get("id")
        if not isinstance(vid, str) or not vid:
            raise SpecParseError(f"{where}.id", f"expected a non-empty string, got {vid!r}")
        if "features" not in v:
            raise SpecParseError(f"{where}.features", "missing field")
        feats = v["features"]
        if not isinstance(feats, list) or not feats or any(isinstance(f, bool) or not isinstance(f, int) for f in feats):
            raise SpecParseError(f"{where}.features", "expected a non-empty list of integers")
        vecs.append(AttackVector(vid, tuple(feats)))
        reward[vid] = _number(v, "reward", where)
        noise[vid] = _number(v, "noise", where)
    spec = GameSpec(vectors=tuple(vecs), reward=reward, noise=noise, p=p, c_d=c_d, c_fa=c_fa)
    return SpecFile(raw=doc, spec=spec)


def parse_strategies(text: str, spec: GameSpec, source: str = "strategies") -> tuple[MixedStrategy, MixedStrategy]:
    """Read ``alpha`` (vector id -> weight) and ``beta`` (threshold label -> weight)."""
    doc = _load_json(text, source)
    if not isinstance(doc, dict):
        raise SpecParseError(source, "expected an object")
    maps = {}
    for key in ("alpha", "beta"):
        m = doc.get(key)
        if not isinstance(m, dict) or not m:
            raise SpecParseError(f"{source}.{key}", "expected a non-empty label -> weight map")
        for label, w in m.items():
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise SpecParseError(f"{source}.{key}[{label!r}]", f"expected a number, got {w!r}")
        maps[key] = m
    unknown = sorted(set(maps["alpha"]) - set(spec.ids))
    if unknown:
        raise SpecParseError(f"{source}.alpha", f"unknown attack vector id(s) {unknown}")
    alpha = MixedStrategy(tuple(maps["alpha"]), np.array(list(maps["alpha"].values()), float))
    labels = []
    for label in maps["beta"]:
        try:
            labels.append(ThresholdClassifier.from_label(label))
        except InputError as exc:
            raise SpecParseError(f"{source}.beta", str(exc)) from None
    beta = MixedStrategy(tuple(labels), np.array(list(maps["beta"].values()), float))
    return alpha, beta


def dumps(doc: Any) -> str:
    """Deterministic JSON: insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if not math.isfinite(v):
            return None
        return 0.0 if v == 0.0 else v
    if isinstance(x, np.integer):
        return int(x)
    return x


def format_float(x: float | None) -> str:
    return "" if x is None else repr(0.0 if x == 0.0 else float(x))
