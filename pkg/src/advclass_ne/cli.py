"""Command-line interface: ``advclass-ne {solve,verify,sweep,scenario,fuzz}``.

Exit codes: 0 success, 1 strategies rejected by ``verify``, 2 input error,
3 model-assumption violation, 4 internal verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Sequence

from . import __version__
from .documents import SpecFile, dumps, format_float, parse_spec, parse_strategies
from .errors import ConsistencyError, InputError, ModelAssumptionError, SolverError
from .experiments import (
    SWEEP_PARAMETERS,
    MultiFeatureParams,
    fuzz,
    multi_feature_study,
    sweep,
)
from .game import MixedStrategy
from .oracle import DEFAULT_VERIFY_TOL, verify_ne
from .reduction import expand_alpha, threshold_detection
from .solver import DEFAULT_EPSILON, EquilibriumSet, compute_all_ne

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INPUT = 2
EXIT_ASSUMPTION = 3
EXIT_INTERNAL = 4

# LP oracle and closed form must agree this closely for a solve to pass
ORACLE_GAP_TOL = 1e-7
SWEEP_HEADER = ("param", "value", "k", "attacker_payoff_lo", "attacker_payoff_hi", "defender_payoff", "verified")


def _tool() -> dict:
    return {"name": "advclass-ne", "version": __version__}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _weights(strategy: MixedStrategy) -> dict:
    return {_label(k): w for k, w in zip(strategy.labels, strategy.weights.tolist())}


def _label(x) -> str:
    return x.label() if hasattr(x, "label") else str(x)


def _equilibrium_document(sf: SpecFile, eq: EquilibriumSet, tol: float) -> tuple[dict, bool]:
    reduced = eq.reduced
    full = sf.full_spec()
    alpha_maps, beta_maps = [], []
    worst_a = worst_d = 0.0
    gap = None
    passed = True
    for b in eq.beta_vertices:
        beta = MixedStrategy(reduced.thresholds(), b)
        beta_maps.append(_weights(beta))
        for a in eq.alpha_vertices:
            alpha = expand_alpha(reduced, a, threshold_detection(b))
            if len(alpha_maps) < len(eq.alpha_vertices):
                alpha_maps.append(_weights(alpha))
            report = verify_ne(full, alpha, beta, tol=tol, with_oracle=gap is None, defender_space="all")
            worst_a = max(worst_a, report.attacker_residual)
            worst_d = max(worst_d, report.defender_residual)
            if report.oracle_value_gap is not None:
                gap = report.oracle_value_gap
            passed = passed and report.passed
    if gap is not None and gap > ORACLE_GAP_TOL * max(1.0, abs(eq.defender_value)):
        passed = False
    lo, hi = eq.attacker_payoff_range
    doc = {
        "tool": _tool(),
        "command": "solve",
        "input": sf.raw,
        "settings": {"epsilon": eq.epsilon, "tol": tol},
        "case": eq.case,
        "k": eq.k,
        "singleton": eq.singleton,
        "reward_levels": reduced.rewards,
        "alpha": alpha_maps[0],
        "beta": beta_maps[0],
        "alpha_vertices": alpha_maps,
        "beta_vertices": beta_maps,
        "payoffs": {
            "defender": eq.defender_value,
            "attacker_lo": lo,
            "attacker_hi": hi,
        },
        "verification": {
            "passed": passed,
            "attacker_residual": worst_a,
            "defender_residual": worst_d,
            "oracle_value_gap": gap,
            "tol": tol,
            "pairs_checked": len(eq.alpha_vertices) * len(eq.beta_vertices),
        },
    }
    return doc, passed


def cmd_solve(args) -> int:
    sf = parse_spec(_read(args.spec), args.spec)
    eq = compute_all_ne(sf.reduced(), epsilon=args.epsilon)
    doc, passed = _equilibrium_document(sf, eq, args.tol)
    _write(dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_INTERNAL


def cmd_verify(args) -> int:
    sf = parse_spec(_read(args.spec), args.spec)
    full = sf.full_spec()
    alpha, beta = parse_strategies(_read(args.strategies), full, args.strategies)
    report = verify_ne(full, alpha, beta, tol=args.tol, with_oracle=True, defender_space="all")
    doc = {"tool": _tool(), "command": "verify", "verification": report.as_dict()}
    _write(dumps(doc), args.out)
    return EXIT_OK if report.passed else EXIT_REJECTED


def parse_grid(spec: str | None, listing: str | None) -> list[float]:
    if (spec is None) == (listing is None):
        raise InputError("give exactly one of --grid lo:hi:step and --grid-list v1,v2,...")
    try:
        if listing is not None:
            values = [float(v) for v in listing.split(",") if v.strip()]
        else:
            lo, hi, step = (float(v) for v in spec.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = [round(lo + i * step, 12) for i in range(count)]
    except ValueError:
        raise InputError(f"bad grid {spec or listing!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise InputError(f"bad grid {spec or listing!r}")
    return values


def cmd_sweep(args) -> int:
    sf = parse_spec(_read(args.spec), args.spec)
    grid = parse_grid(args.grid, args.grid_list)
    result = sweep(sf.sweep_base(), args.param, grid, epsilon=args.epsilon, tol=args.tol)
    failed = any(r.error is None and not r.verified for r in result.rows)
    if args.json:
        rows = []
        for r in result.rows:
            rows.append({
                "value": r.value,
                "k": r.k,
                "case": r.case,
                "attacker_payoff": r.attacker_payoff,
                "attacker_payoff_lo": r.attacker_payoff_lo,
                "attacker_payoff_hi": r.attacker_payoff_hi,
                "defender_payoff": r.defender_payoff,
                "alpha_vertices": list(r.alpha_vertices),
                "beta_vertices": list(r.beta_vertices),
                "verified": r.verified,
                "error": r.error,
            })
        doc = {
            "tool": _tool(),
            "command": "sweep",
            "input": sf.raw,
            "settings": {"param": args.param, "epsilon": args.epsilon, "tol": args.tol},
            "rows": rows,
        }
        _write(dumps(doc), args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in result.rows:
            if r.error is not None:
                w.writerow((args.param, format_float(r.value), "", "", "", "", "error"))
                print(f"warning: {args.param}={r.value!r}: {r.error}", file=sys.stderr)
                continue
            w.writerow((
                args.param, format_float(r.value), r.k,
                format_float(r.attacker_payoff_lo), format_float(r.attacker_payoff_hi),
                format_float(r.defender_payoff), "true" if r.verified else "false",
            ))
        _write(buf.getvalue(), args.out)
    return EXIT_INTERNAL if failed else EXIT_OK


def cmd_scenario(args) -> int:
    params = MultiFeatureParams(
        N=args.N, c_a=args.c_a, c_low=args.c_low, c_high=args.c_high, p=args.p,
        theta0=args.theta0, theta_low=args.theta_low, c_d=args.c_d, c_fa=args.c_fa,
    )
    results = multi_feature_study(params)
    if args.json:
        doc = {
            "tool": _tool(),
            "command": "scenario",
            "params": dict(vars(params)),
            "scenarios": [
                {
                    "scenario": s.scenario,
                    "description": s.description,
                    "defender_payoff": s.defender_payoff,
                    "attacker_payoff": s.attacker_payoff,
                    "attacker": _weights(s.attacker),
                    "defender": _weights(s.defender),
                }
                for s in results
            ],
        }
        _write(dumps(doc), args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("scenario", "defender_payoff", "attacker_payoff"))
        for s in results:
            w.writerow((s.scenario, format_float(s.defender_payoff), format_float(s.attacker_payoff)))
        _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_fuzz(args) -> int:
    if args.count < 1:
        raise InputError("--count must be positive")
    if not 0 <= args.seed < 2**64:
        raise InputError("--seed must be an unsigned 64-bit integer")
    cases = fuzz(args.seed, args.count, tol=args.tol)
    ok = all(c.passed for c in cases)
    if args.json:
        doc = {
            "tool": _tool(),
            "command": "fuzz",
            "seed": args.seed,
            "count": args.count,
            "passed": ok,
            "cases": [vars(c) for c in cases],
        }
        _write(dumps(doc), args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("index", "seed", "n", "case", "value_gap", "duality_gap", "max_residual", "passed"))
        for c in cases:
            w.writerow((
                c.index, args.seed + c.index, c.n, c.case, format_float(c.value_gap),
                format_float(c.duality_gap), format_float(c.max_residual), "true" if c.passed else "false",
            ))
        _write(buf.getvalue(), args.out)
    return EXIT_OK if ok else EXIT_INTERNAL


def _common(p: argparse.ArgumentParser, epsilon: bool = True) -> None:
    if epsilon:
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="matrix shift beyond r_max (default 1)")
    p.add_argument("--tol", type=float, default=DEFAULT_VERIFY_TOL, help="verification tolerance (default 1e-9)")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advclass-ne", description="Nash equilibria of adversarial classification games.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute and certify every equilibrium of a spec")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true", help="accepted for symmetry; solve always emits JSON")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a strategy pair against a spec")
    p.add_argument("spec")
    p.add_argument("strategies")
    p.add_argument("--json", action="store_true", help="accepted for symmetry; verify always emits JSON")
    _common(p, epsilon=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="solve across a parameter grid (CSV)")
    p.add_argument("spec")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--grid", help="lo:hi:step, both ends inclusive")
    p.add_argument("--grid-list", help="comma-separated values")
    p.add_argument("--json", action="store_true", help="emit a JSON document instead of CSV")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    d = MultiFeatureParams()
    p = sub.add_parser("scenario", help="two-feature study, four scenarios (CSV)")
    p.add_argument("--N", type=int, default=d.N)
    p.add_argument("--c-a", dest="c_a", type=float, default=d.c_a)
    p.add_argument("--c-low", dest="c_low", type=float, default=d.c_low)
    p.add_argument("--c-high", dest="c_high", type=float, default=d.c_high)
    p.add_argument("--p", type=float, default=d.p)
    p.add_argument("--theta0", type=float, default=d.theta0)
    p.add_argument("--theta-low", dest="theta_low", type=float, default=d.theta_low)
    p.add_argument("--c-d", dest="c_d", type=float, default=d.c_d)
    p.add_argument("--c-fa", dest="c_fa", type=float, default=d.c_fa)
    p.add_argument("--json", action="store_true", help="emit a JSON document with strategies")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("fuzz", help="closed form vs LP oracle on seeded random games")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", 1.0) <= 0 or not math.isfinite(getattr(args, "tol", 1.0)):
        print("error: --tol must be a positive real", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ModelAssumptionError as exc:
        print(f"error: model assumption violated ({exc.assumption}): {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, ConsistencyError, AssertionError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
