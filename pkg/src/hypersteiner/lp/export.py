"""CPLEX-style LP text dump for cross-checking with external solvers."""

from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction

from ..ring import QuadraticNumber
from .model import EQ, GE, LE, LinearProgram


def _is_decimal(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _decimal(v) -> tuple[str, bool]:
    """Decimal rendering and whether it is exact."""
    if isinstance(v, QuadraticNumber):
        if v.b:
            return repr(float(v)), False
        v = v.a
    q = Fraction(v)
    if q.denominator == 1:
        return str(q.numerator), True
    if _is_decimal(q):
        with localcontext() as ctx:
            ctx.prec = 60
            return str(Decimal(q.numerator) / Decimal(q.denominator)), True
    return repr(float(q)), False


def _terms(coeffs: dict, names: list) -> tuple[str, bool]:
    parts = []
    exact = True
    for j in sorted(coeffs):
        s, ok = _decimal(coeffs[j])
        exact &= ok
        sign = "-" if s.startswith("-") else "+"
        parts.append(f"{sign} {s.lstrip('-')} {names[j]}")
    text = " ".join(parts) if parts else "0 x0"
    if text.startswith("+ "):
        text = text[2:]
    return text, exact


def to_lp_format(lp: LinearProgram) -> str:
    """Render ``lp``; a header comment says whether any value was rounded."""
    names = [f"x{j}" for j in range(len(lp.columns))]
    lines = []
    body = [("Minimize" if lp.sense == "min" else "Maximize")]
    obj, lossless = _terms(dict(enumerate(lp.objective)), names)
    body.append(f" obj: {obj}")
    body.append("Subject To")
    ops = {GE: ">=", LE: "<=", EQ: "="}
    for i, row in enumerate(lp.rows):
        text, ok = _terms(row.coeffs, names)
        rhs, ok2 = _decimal(row.rhs)
        lossless &= ok and ok2
        body.append(f" r{i}: {text} {ops[row.relation]} {rhs}")
    body.append("Bounds")
    for n in names:
        body.append(f" {n} >= 0")
    body.append("End")
    lines.append(f"\\ model {lp.name}: {len(lp.rows)} rows, {len(lp.columns)} columns")
    lines.append("\\ exact" if lossless else "\\ lossy: some values are rounded decimals")
    for j, c in enumerate(lp.columns):
        lines.append(f"\\ x{j} = {_describe(c)}")
    for i, row in enumerate(lp.rows):
        lines.append(f"\\ r{i} = {_describe(row.name)}")
    return "\n".join(lines + body) + "\n"


def _describe(name) -> str:
    if isinstance(name, frozenset):
        return "{" + ",".join(map(str, sorted(name))) + "}"
    return str(name)
