"""Exact two-phase tableau simplex with Bland's rule.

Rational programs are solved over gmpy2 ``mpq`` (much faster than
``fractions.Fraction``); programs with quadratic-irrational data are solved
over :class:`QuadraticNumber`.  Results are returned as ``Fraction`` or
exact ring values and are re-verified by substitution before returning.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from ..ring import QuadraticNumber, exact
from .model import EQ, GE, LE, LinearProgram, LpInfeasible, LpSolution, LpUnbounded, verify_solution


def _is_rational(v) -> bool:
    return not isinstance(v, QuadraticNumber) or v.b == 0


def _converters(lp: LinearProgram):
    values = list(lp.objective)
    for row in lp.rows:
        values.append(row.rhs)
        values.extend(row.coeffs.values())
    if all(_is_rational(v) for v in values):
        def to_num(v):
            if isinstance(v, QuadraticNumber):
                v = v.a
            v = Fraction(v)
            return mpq(v.numerator, v.denominator)

        def from_num(v):
            return Fraction(int(v.numerator), int(v.denominator))
        return to_num, from_num, mpq(0)
    return QuadraticNumber.coerce, exact, QuadraticNumber(0)


class _Tableau:
    """Dense tableau: rows 0..m-1 are constraints, row m is the cost row."""

    def __init__(self, T, basis, zero):
        self.T = T
        self.basis = basis
        self.zero = zero

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        T[r] = T[r] / T[r, c]
        col = T[:, c]
        rows = [i for i in np.flatnonzero(col != 0) if i != r]
        if rows:
            nzc = np.flatnonzero(T[r] != 0)
            factors = col[rows].copy()
            T[np.ix_(rows, nzc)] -= np.outer(factors, T[r, nzc])
        self.basis[r] = c

    def set_costs(self, costs) -> None:
        m = len(self.basis)
        T = self.T
        T[m] = costs
        for i, b in enumerate(self.basis):
            cb = costs[b]
            if cb != 0:
                T[m] -= cb * T[i]

    def run(self, allowed) -> None:
        """Bland's rule until optimal; ``allowed`` masks columns that may enter."""
        T = self.T
        m = len(self.basis)
        while True:
            neg = np.flatnonzero((T[m, :-1] < 0) & allowed)
            if len(neg) == 0:
                return
            c = int(neg[0])
            col = T[:m, c]
            best = None
            for i in np.flatnonzero(col > 0):
                ratio = T[i, -1] / col[i]
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                raise LpUnbounded("objective unbounded")
            self.pivot(int(best[1]), c)


def _standard_min(lp: LinearProgram, to_num):
    sign = 1 if lp.sense == "min" else -1
    cost = [sign * to_num(c) for c in lp.objective]
    rows = []
    for row in lp.rows:
        rows.append(({j: to_num(a) for j, a in row.coeffs.items()}, row.relation, to_num(row.rhs)))
    return sign, cost, rows


def _solve_primal(n, cost, rows, zero):
    """Two-phase simplex on min cost.x, rows, x >= 0.

    Returns (x, y, basis) where y are min-form row duals.
    """
    m = len(rows)
    flips = []
    n_slack = sum(1 for _, rel, _ in rows if rel != EQ)
    n_art = sum(1 for _, rel, b in rows if rel != LE or b < 0)
    width = n + n_slack + n_art
    T = np.full((m + 1, width + 1), zero, dtype=object)
    basis = [0] * m
    unit = [0] * m
    s_next, a_next = n, n + n_slack
    for i, (coeffs, rel, b) in enumerate(rows):
        flip = b < 0
        flips.append(flip)
        sg = -1 if flip else 1
        for j, a in coeffs.items():
            T[i, j] = sg * a
        T[i, -1] = sg * b
        if flip:
            rel = {GE: LE, LE: GE, EQ: EQ}[rel]
        if rel != EQ:
            T[i, s_next] = zero + (1 if rel == LE else -1)
            slack = s_next
            s_next += 1
        if rel == LE:
            basis[i] = unit[i] = slack
        else:
            T[i, a_next] = zero + 1
            basis[i] = unit[i] = a_next
            a_next += 1
    tab = _Tableau(T, basis, zero)
    art_start = n + n_slack
    allowed = np.ones(width, dtype=bool)
    if n_art:
        phase1 = [zero] * width
        for j in range(art_start, width):
            phase1[j] = zero + 1
        tab.set_costs(phase1 + [zero])
        tab.run(allowed)
        if T[m, -1] != 0:
            raise LpInfeasible("no feasible point")
        for i in range(m):
            if basis[i] >= art_start:
                nz = np.flatnonzero(T[i, :art_start] != 0)
                if len(nz):
                    tab.pivot(i, int(nz[0]))
        allowed[art_start:] = False
    full_cost = list(cost) + [zero] * (width - n) + [zero]
    tab.set_costs(full_cost)
    tab.run(allowed)
    x = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i, -1]
    y = []
    for i in range(m):
        yi = zero
        for k, b in enumerate(basis):
            cb = full_cost[b]
            if cb != 0:
                yi = yi + cb * T[k, unit[i]]
        if flips[i]:
            yi = -yi
        y.append(yi)
    return x, y, [b for b in basis if b < n]


def _solve_via_dual(n, cost, rows, zero):
    """Solve min cost.x, rows, x >= 0 (cost >= 0) through its dual.

    The dual, written with nonnegative variables and <= rows whose right-hand
    sides are the costs, starts from the all-slack basis.  Its row duals give a
    basic optimal primal solution.
    """
    m = len(rows)
    dcols = []  # (primal row, sign)
    for i, (_, rel, _) in enumerate(rows):
        if rel == GE:
            dcols.append((i, 1))
        elif rel == LE:
            dcols.append((i, -1))
        else:
            dcols.append((i, 1))
            dcols.append((i, -1))
    k = len(dcols)
    # transpose: dual row j collects coefficient of primal column j in each primal row
    drows = [dict() for _ in range(n)]
    dcost = []
    for col, (i, sg) in enumerate(dcols):
        coeffs, _, b = rows[i]
        for j, a in coeffs.items():
            drows[j][col] = sg * a
        dcost.append(-sg * b)
    try:
        u, w, _ = _solve_primal(k, dcost, [(drows[j], LE, cost[j]) for j in range(n)], zero)
    except LpUnbounded:
        raise LpInfeasible("no feasible point (dual unbounded)") from None
    x = [-v for v in w]
    y = [zero] * m
    for col, (i, sg) in enumerate(dcols):
        y[i] = y[i] + sg * u[col]
    return x, y


def solve_exact(lp: LinearProgram, route: str | None = None) -> LpSolution:
    """Optimal basic solution and row duals, verified by substitution.

    ``route`` is ``"primal"`` (two-phase on the program itself) or ``"dual"``
    (simplex on the dual, valid for minimisation with nonnegative costs).  By
    default the route with the smaller tableau is used.
    """
    to_num, from_num, zero = _converters(lp)
    sign, cost, rows = _standard_min(lp, to_num)
    n = len(lp.columns)
    dual_ok = all(c >= 0 for c in cost)
    if route is None:
        route = "dual" if dual_ok and len(rows) > n else "primal"
    if route == "dual":
        if not dual_ok:
            raise ValueError("dual route needs nonnegative costs in minimisation form")
        x, y = _solve_via_dual(n, cost, rows, zero)
    elif route == "primal":
        x, y, _ = _solve_primal(n, cost, rows, zero)
    else:
        raise ValueError(f"unknown route {route!r}")
    xs = [from_num(v) for v in x]
    ys = [from_num(sign * v) for v in y]
    value = verify_solution(lp, xs, ys)
    tight = []
    for i, row in enumerate(lp.rows):
        if row.relation == EQ or lp.row_activity(row, xs) == row.rhs:
            tight.append(i)
    basis = tuple(j for j, v in enumerate(xs) if v)
    return LpSolution(lp, xs, ys, value, basis, tuple(tight), route)
