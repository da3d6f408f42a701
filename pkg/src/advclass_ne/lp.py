"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Sized for the small LPs of the oracle (a few hundred variables at most).
Exactness of the pivoting logic matters more here than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, SolverError

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
MAX_PIVOTS = 100_000

Bound = tuple[Optional[float], Optional[float]]


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``maximize objective @ x`` subject to ``A[i] @ x (sense_i) b[i]`` and bounds.

    ``senses`` entries are ``"<="``, ``">="`` or ``"="``.  ``bounds`` holds a
    ``(lo, hi)`` pair per variable, ``None`` meaning unbounded on that side;
    the default is ``(0, None)`` for every variable.
    """

    objective: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    bounds: tuple[Bound, ...] = ()
    maximize: bool = True

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1) if A.size else A.reshape(0, c.size)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        senses = tuple(self.senses)
        if A.shape != (b.size, c.size):
            raise InputError(f"constraint matrix has shape {A.shape}, expected {(b.size, c.size)}")
        if len(senses) != b.size or any(s not in ("<=", ">=", "=") for s in senses):
            raise InputError("one sense among '<=', '>=', '=' is required per constraint")
        bounds = tuple(self.bounds) or tuple((0.0, None) for _ in range(c.size))
        if len(bounds) != c.size:
            raise InputError("one (lo, hi) bound pair is required per variable")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class LPSolution:
    x: np.ndarray
    value: float
    pivots: int
    basis: list[int] = field(default_factory=list)

    def slacks(self, lp: LinearProgram) -> np.ndarray:
        """Slack of every constraint at ``x``; zero means tight (equalities report |residual|)."""
        lhs = lp.A @ self.x
        out = np.empty_like(lhs)
        for i, s in enumerate(lp.senses):
            if s == "<=":
                out[i] = lp.b[i] - lhs[i]
            elif s == ">=":
                out[i] = lhs[i] - lp.b[i]
            else:
                out[i] = abs(lhs[i] - lp.b[i])
        return out


class _Tableau:
    """Rows 0..m-1 are constraints, row m is the reduced-cost row.

    Reduced costs are stored as ``c_j - z_j``; a positive entry improves the
    (maximization) objective.  The last column is the right-hand side.
    """

    def __init__(self, T: np.ndarray, basis: list[int]):
        self.T = T
        self.basis = basis
        self.pivots = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        T[:, j] = 0.0
        T[i, j] = 1.0
        self.basis[i] = j
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise SolverError("simplex exceeded the pivot limit")

    def run(self, allowed: np.ndarray) -> str:
        T = self.T
        m = self.m
        while True:
            cost = T[m, :-1]
            entering = np.flatnonzero((cost > PIVOT_TOL) & allowed)
            if entering.size == 0:
                return "optimal"
            j = int(entering[0])
            column = T[:m, j]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            i = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(i, j)


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly to floating-point precision.

    Raises :class:`SolverError` when the LP is infeasible or unbounded.
    """
    n = lp.n_vars
    A = lp.A.copy()
    b = lp.b.copy()
    senses = list(lp.senses)

    # map original variables to nonnegative columns: x = lo + x' or x = x+ - x-
    var_cols: list[list[tuple[int, float]]] = []
    shift = np.zeros(n)
    extra_rows: list[tuple[np.ndarray, str, float]] = []
    ncols = 0
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is None:
            var_cols.append([(ncols, 1.0), (ncols + 1, -1.0)])
            ncols += 2
        else:
            shift[j] = float(lo)
            var_cols.append([(ncols, 1.0)])
            ncols += 1
        if hi is not None:
            row = np.zeros(n)
            row[j] = 1.0
            extra_rows.append((row, "<=", float(hi)))
    for row, s, rhs in extra_rows:
        A = np.vstack([A, row])
        b = np.append(b, rhs)
        senses.append(s)
    b = b - A @ shift

    m = b.size
    M = np.zeros((m, ncols))
    c = np.zeros(ncols)
    for j, cols in enumerate(var_cols):
        for col, sign in cols:
            M[:, col] = sign * A[:, j]
            c[col] = sign * lp.objective[j]
    if not lp.maximize:
        c = -c

    for i in range(m):
        if b[i] < 0:
            M[i] *= -1.0
            b[i] *= -1.0
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    width = ncols + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :ncols] = M
    T[:m, -1] = b
    basis = [0] * m
    slack_col = ncols
    art_col = ncols + n_slack
    art_cols = []
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, slack_col] = 1.0
            basis[i] = slack_col
            slack_col += 1
        elif s == ">=":
            T[i, slack_col] = -1.0
            slack_col += 1
        if s != "<=":
            T[i, art_col] = 1.0
            basis[i] = art_col
            art_cols.append(art_col)
            art_col += 1
    tab = _Tableau(T, basis)
    allowed = np.ones(width, dtype=bool)

    if art_cols:
        # phase 1: maximize -sum(artificials)
        T[m, :] = 0.0
        for i, bv in enumerate(basis):
            if bv in art_cols:
                T[m, :] += T[i, :]
        T[m, art_cols] = 0.0
        status = tab.run(allowed)
        infeasibility = -T[m, -1]
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if status != "optimal" or abs(T[m, -1]) > FEAS_TOL * scale:
            raise SolverError(f"LP is infeasible (phase-1 residual {abs(infeasibility):.3g})")
        art_set = set(art_cols)
        keep = []
        for i in range(m):
            if tab.basis[i] in art_set:
                row = T[i, :ncols + n_slack]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(i, int(nz[0]))
                    keep.append(i)
                # else: redundant equality row, dropped below
            else:
                keep.append(i)
        if len(keep) < m:
            T = np.vstack([T[keep], T[m:]])
            tab.T = T
            tab.basis = [tab.basis[i] for i in keep]
            m = len(keep)
        allowed[art_cols] = False

    # phase 2
    T = tab.T
    T[m, :] = 0.0
    T[m, :width] = np.concatenate([c, np.zeros(width - ncols)])
    for i, bv in enumerate(tab.basis):
        if T[m, bv] != 0.0:
            T[m, :] -= T[m, bv] * T[i, :]
    status = tab.run(allowed)
    if status == "unbounded":
        raise SolverError("LP is unbounded")

    y = np.zeros(width)
    for i, bv in enumerate(tab.basis):
        y[bv] = T[i, -1]
    x = shift.copy()
    for j, cols in enumerate(var_cols):
        for col, sign in cols:
            x[j] += sign * y[col]
    value = float(lp.objective @ x)
    return LPSolution(x=x, value=value, pivots=tab.pivots, basis=list(tab.basis))


def solve(
    objective: Sequence[float],
    A: Sequence[Sequence[float]],
    senses: Sequence[str],
    b: Sequence[float],
    bounds: Sequence[Bound] = (),
    maximize: bool = True,
) -> LPSolution:
    lp = LinearProgram(
        np.asarray(objective, float), np.asarray(A, float), tuple(senses),
        np.asarray(b, float), tuple(bounds), maximize,
    )
    return solve_lp(lp)
