"""Exact arithmetic in Q(sqrt d).

Reduced costs such as c/sqrt(2) or thresholds such as (sqrt(3) - 1) * loss
have to be compared exactly, so they live in the field Q(sqrt d) for a
squarefree d.  A value ``a + b*sqrt(d)`` with ``b == 0`` is an ordinary
rational and mixes freely with any d.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
import re


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class QuadraticNumber:
    """The number ``a + b*sqrt(d)`` with rational a, b."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 0):
        self.a = _frac(a)
        self.b = _frac(b)
        if self.b == 0:
            d = 0
        elif d < 2:
            raise ValueError("radicand must be a squarefree integer >= 2")
        self.d = d

    # -- coercion -----------------------------------------------------
    @staticmethod
    def coerce(x) -> "QuadraticNumber":
        if isinstance(x, QuadraticNumber):
            return x
        return QuadraticNumber(_frac(x))

    def _common(self, other: "QuadraticNumber") -> int:
        if self.d and other.d and self.d != other.d:
            raise ValueError(f"cannot mix sqrt({self.d}) and sqrt({other.d})")
        return self.d or other.d

    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is irrational")
        return self.a

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticNumber(self.a + o.a, self.b + o.b, self._common(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticNumber(self.a - o.a, self.b - o.b, self._common(o))

    def __rsub__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._common(o)
        return QuadraticNumber(self.a * o.a + self.b * o.b * d,
                               self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticNumber":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return QuadraticNumber(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        if o.b == 0:
            if o.a == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt d)")
            return QuadraticNumber(self.a / o.a, self.b / o.a, self.d)
        return self * o.inverse()

    def __rtruediv__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return o / self

    # -- order --------------------------------------------------------
    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: the larger magnitude wins
        if self.a * self.a > self.b * self.b * self.d:
            return sa
        return sb

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        try:
            o = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * self.d ** 0.5

    def __repr__(self):
        return f"QuadraticNumber({self})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        op = "+" if self.b > 0 else "-"
        return f"{self.a} {op} {abs(self.b)}*sqrt({self.d})"


def sqrt(d: int) -> QuadraticNumber:
    return QuadraticNumber(0, 1, d)


SQRT2 = sqrt(2)
SQRT3 = sqrt(3)


def exact(x):
    """Collapse a rational QuadraticNumber to a Fraction; pass others through."""
    if isinstance(x, QuadraticNumber) and x.b == 0:
        return x.a
    if isinstance(x, int):
        return Fraction(x)
    return x


def format_value(x) -> str:
    """Render an exact value as ``p/q`` or ``p/q + r/s*sqrt(d)``."""
    x = exact(x)
    if isinstance(x, QuadraticNumber):
        return str(x)
    return str(_frac(x))


_QUAD_RE = re.compile(
    r"^\s*(?P<a>-?\d+(?:/\d+)?)\s*(?P<op>[+-])\s*(?P<b>\d+(?:/\d+)?)\*sqrt\((?P<d>\d+)\)\s*$")


def parse_value(text: str):
    """Inverse of :func:`format_value`; also accepts ``sqrtN`` and ``sqrt(N)``."""
    text = text.strip()
    m = re.fullmatch(r"sqrt\(?(\d+)\)?", text)
    if m:
        return sqrt(int(m.group(1)))
    m = _QUAD_RE.match(text)
    if m:
        b = Fraction(m.group("b"))
        if m.group("op") == "-":
            b = -b
        return QuadraticNumber(Fraction(m.group("a")), b, int(m.group("d")))
    return Fraction(text)
