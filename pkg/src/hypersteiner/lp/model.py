"""Explicit linear programs with exact coefficients and their solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping

from ..ring import exact

GE, LE, EQ = ">=", "<=", "="


class LpError(RuntimeError):
    pass


class LpInfeasible(LpError):
    pass


class LpUnbounded(LpError):
    pass


class VerificationError(LpError):
    pass


@dataclass
class Row:
    name: Hashable
    coeffs: dict[int, object]  # column index -> coefficient
    relation: str
    rhs: object


@dataclass
class LinearProgram:
    """min/max c.x subject to rows, with every variable nonnegative."""

    name: str
    sense: str = "min"
    columns: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    _col_index: dict = field(default_factory=dict, repr=False)
    _row_names: set = field(default_factory=set, repr=False)

    def add_column(self, name: Hashable, cost) -> int:
        if name in self._col_index:
            raise ValueError(f"duplicate column {name!r}")
        self._col_index[name] = len(self.columns)
        self.columns.append(name)
        self.objective.append(cost)
        return len(self.columns) - 1

    def add_row(self, name: Hashable, coeffs: Mapping[int, object], relation: str, rhs) -> None:
        if relation not in (GE, LE, EQ):
            raise ValueError(f"bad relation {relation!r}")
        if name in self._row_names:
            raise ValueError(f"duplicate row {name!r}")
        self._row_names.add(name)
        self.rows.append(Row(name, {j: v for j, v in coeffs.items() if v != 0}, relation, rhs))

    def column_index(self, name) -> int:
        return self._col_index[name]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.columns)

    def row_activity(self, row: Row, x: list) -> object:
        total = Fraction(0)
        for j, a in row.coeffs.items():
            if x[j]:
                total = total + a * x[j]
        return total

    def is_feasible(self, x: list) -> bool:
        if any(v < 0 for v in x):
            return False
        for row in self.rows:
            act = self.row_activity(row, x)
            if row.relation == GE and act < row.rhs:
                return False
            if row.relation == LE and act > row.rhs:
                return False
            if row.relation == EQ and act != row.rhs:
                return False
        return True

    def value(self, x: list) -> object:
        total = Fraction(0)
        for c, v in zip(self.objective, x):
            if v:
                total = total + c * v
        return exact(total)

    def primal_vector(self, mapping: Mapping) -> list:
        x = [Fraction(0)] * len(self.columns)
        for name, v in mapping.items():
            x[self._col_index[name]] = v
        return x


@dataclass
class LpSolution:
    lp: LinearProgram
    x: list                 # primal, indexed like lp.columns
    y: list                 # dual, indexed like lp.rows
    objective: object
    basis_columns: tuple[int, ...]
    tight_rows: tuple[int, ...]
    route: str = "primal"

    @property
    def primal(self) -> dict:
        return {self.lp.columns[j]: v for j, v in enumerate(self.x) if v}

    @property
    def dual(self) -> dict:
        return {self.lp.rows[i].name: v for i, v in enumerate(self.y) if v}

    @property
    def support(self) -> list:
        return [self.lp.columns[j] for j, v in enumerate(self.x) if v]


def verify_solution(lp: LinearProgram, x: list, y: list) -> object:
    """Check primal feasibility, dual feasibility and equal objectives.

    Dual sign conventions follow the minimisation form: rows ``>=`` carry
    y >= 0, rows ``<=`` carry y <= 0, equality rows are free, and
    A^T y <= c.  For maximisation the inequalities flip.  Returns the common
    objective value.
    """
    sgn = 1 if lp.sense == "min" else -1
    if not lp.is_feasible(x):
        raise VerificationError(f"{lp.name}: primal solution infeasible")
    reduced = [sgn * c for c in lp.objective]
    for i, row in enumerate(lp.rows):
        yi = sgn * y[i]
        if row.relation == GE and yi < 0 or row.relation == LE and yi > 0:
            raise VerificationError(f"{lp.name}: dual of row {row.name!r} has wrong sign")
        if yi:
            for j, a in row.coeffs.items():
                reduced[j] = reduced[j] - a * yi
    for j, r in enumerate(reduced):
        if r < 0:
            raise VerificationError(f"{lp.name}: dual constraint of column {lp.columns[j]!r} violated")
    pv = lp.value(x)
    dv = Fraction(0)
    for i, row in enumerate(lp.rows):
        if y[i]:
            dv = dv + row.rhs * y[i]
    dv = exact(dv)
    if pv != dv:
        raise VerificationError(f"{lp.name}: primal value {pv} differs from dual value {dv}")
    return pv
