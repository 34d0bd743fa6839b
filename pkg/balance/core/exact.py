"""
Exact arithmetic: rationals and real quadratic numbers a + b*sqrt(d).

Every comparison is decided exactly. Decimal strings are produced for display
only, by scaled integer division, and are never fed back into a computation.
"""

from __future__ import annotations

import math
from enum import IntEnum
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction]
ExactNumber = Union[int, Fraction, "QuadraticNumber"]


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _sign(value: RationalLike) -> int:
    return (value > 0) - (value < 0)


def rat_compare(x: RationalLike, y: RationalLike) -> Ordering:
    """Order two rationals by cross-multiplication."""
    x, y = Fraction(x), Fraction(y)
    return Ordering(_sign(x.numerator * y.denominator - y.numerator * x.denominator))


def is_square_free(d: int) -> bool:
    if d < 1:
        return False
    for p in range(2, math.isqrt(d) + 1):
        if d % (p * p) == 0:
            return False
    return True


@total_ordering
class QuadraticNumber:
    """An element a + b*sqrt(d) of the real quadratic field Q(sqrt(d))."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0, d: int = 2) -> None:
        if isinstance(d, bool) or not isinstance(d, int) or d < 2 or not is_square_free(d):
            raise ValueError(f"Radicand must be a square-free integer greater than 1, got {d!r}")
        self._a = Fraction(a)
        self._b = Fraction(b)
        self._d = d

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def d(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._b == 0

    @classmethod
    def sqrt(cls, d: int) -> QuadraticNumber:
        return cls(0, 1, d)

    @classmethod
    def coerce(cls, value: ExactNumber, d: int) -> QuadraticNumber:
        """Embed ``value`` into Q(sqrt(d))."""
        if isinstance(value, QuadraticNumber):
            if value._d == d:
                return value
            if value._b == 0:
                return cls(value._a, 0, d)
            raise ValueError("incomparable representation")
        if isinstance(value, (int, Fraction)):
            return cls(value, 0, d)
        raise TypeError(f"Cannot embed {type(value).__name__} into Q(sqrt({d}))")

    def _common(self, other: object) -> tuple[QuadraticNumber, QuadraticNumber]:
        if isinstance(other, (int, Fraction)):
            return self, QuadraticNumber(other, 0, self._d)
        if not isinstance(other, QuadraticNumber):
            raise TypeError(type(other).__name__)
        if other._d == self._d:
            return self, other
        if other._b == 0:
            return self, QuadraticNumber(other._a, 0, self._d)
        if self._b == 0:
            return QuadraticNumber(self._a, 0, other._d), other
        raise ValueError("incomparable representation")

    # -- field arithmetic -------------------------------------------------

    def __add__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction, QuadraticNumber)):
            return NotImplemented
        x, y = self._common(other)
        return QuadraticNumber(x._a + y._a, x._b + y._b, x._d)

    def __radd__(self, other: object) -> QuadraticNumber:
        return self.__add__(other)

    def __neg__(self) -> QuadraticNumber:
        return QuadraticNumber(-self._a, -self._b, self._d)

    def __pos__(self) -> QuadraticNumber:
        return self

    def __abs__(self) -> QuadraticNumber:
        return -self if self.sign() < 0 else self

    def __sub__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction, QuadraticNumber)):
            return NotImplemented
        x, y = self._common(other)
        return QuadraticNumber(x._a - y._a, x._b - y._b, x._d)

    def __rsub__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return QuadraticNumber(other - self._a, -self._b, self._d)

    def __mul__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction, QuadraticNumber)):
            return NotImplemented
        x, y = self._common(other)
        return QuadraticNumber(
            x._a * y._a + x._b * y._b * x._d,
            x._a * y._b + x._b * y._a,
            x._d,
        )

    def __rmul__(self, other: object) -> QuadraticNumber:
        return self.__mul__(other)

    def conjugate(self) -> QuadraticNumber:
        return QuadraticNumber(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        """a^2 - d*b^2, zero only for zero since d is not a square."""
        return self._a * self._a - self._d * self._b * self._b

    def inverse(self) -> QuadraticNumber:
        norm = self.norm()
        if norm == 0:
            raise ZeroDivisionError("division by zero")
        return QuadraticNumber(self._a / norm, -self._b / norm, self._d)

    def __truediv__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction, QuadraticNumber)):
            return NotImplemented
        x, y = self._common(other)
        return x * y.inverse()

    def __rtruediv__(self, other: object) -> QuadraticNumber:
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self.inverse() * other

    def __pow__(self, exponent: int) -> QuadraticNumber:
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = QuadraticNumber(1, 0, self._d)
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- ordering ---------------------------------------------------------

    def sign(self) -> int:
        """Exact sign, deciding mixed-sign cases by squaring."""
        sa, sb = _sign(self._a), _sign(self._b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # a and b*sqrt(d) have opposite signs: the larger magnitude wins
        return sa * _sign(self._a * self._a - self._b * self._b * self._d)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self._b == 0 and self._a == other
        if isinstance(other, QuadraticNumber):
            if self._b == 0 and other._b == 0:
                return self._a == other._a
            return self._d == other._d and self._a == other._a and self._b == other._b
        return NotImplemented

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, (int, Fraction, QuadraticNumber)):
            return NotImplemented
        return (self - other).sign() < 0

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def __floor__(self) -> int:
        if self._b == 0:
            return math.floor(self._a)
        radicand = self._b * self._b * self._d
        root = Fraction(math.isqrt(radicand.numerator * radicand.denominator), radicand.denominator)
        guess = math.floor(self._a + (root if self._b > 0 else -root))
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def __repr__(self) -> str:
        return f"QuadraticNumber({self._a}, {self._b}, {self._d})"

    def __str__(self) -> str:
        return format_quadratic(self)


def quad_compare(x: ExactNumber, y: ExactNumber) -> Ordering:
    """Exact order of two quadratic numbers sharing a radicand (or one rational)."""
    if isinstance(x, QuadraticNumber) and isinstance(y, QuadraticNumber):
        if x.d != y.d and x.b != 0 and y.b != 0:
            raise ValueError("incomparable representation")
    if not isinstance(x, QuadraticNumber) and not isinstance(y, QuadraticNumber):
        return rat_compare(x, y)
    left = x if isinstance(x, QuadraticNumber) else QuadraticNumber.coerce(x, y.d)  # type: ignore[union-attr]
    return Ordering((left - y).sign())


def quad_arith(x: ExactNumber, y: ExactNumber, op: str) -> QuadraticNumber:
    """Field arithmetic in Q(sqrt(d)); ``op`` is one of + - * / (or the unicode forms)."""
    left = x if isinstance(x, QuadraticNumber) else QuadraticNumber.coerce(x, y.d)  # type: ignore[union-attr]
    if op == "+":
        return left + y
    if op in ("-", "−"):
        return left - y
    if op in ("*", "×"):
        return left * y
    if op in ("/", "÷"):
        return left / y
    raise ValueError(f"Unknown operation {op!r}")


def exact_compare(x: ExactNumber, y: ExactNumber) -> Ordering:
    if isinstance(x, QuadraticNumber) or isinstance(y, QuadraticNumber):
        return quad_compare(x, y)
    return rat_compare(x, y)


def bracket_compare(x: ExactNumber, y: ExactNumber, max_digits: int = 64) -> Ordering:
    """Order numbers from different quadratic fields by refining decimal brackets."""
    try:
        return exact_compare(x, y)
    except ValueError:
        pass
    for digits in range(max_digits + 1):
        scale = 10 ** digits
        low_x, low_y = math.floor(x * scale), math.floor(y * scale)
        if low_x != low_y:
            return Ordering.LESS if low_x < low_y else Ordering.GREATER
    raise ValueError(f"Could not separate {x} and {y} within {max_digits} digits")


def decimal_approximation(value: ExactNumber, digits: int = 6) -> str:
    """Round half up to ``digits`` places using exact integer arithmetic."""
    if digits < 0:
        raise ValueError("digits must be non-negative")
    scale = 10 ** digits
    half = Fraction(1, 2)
    if isinstance(value, QuadraticNumber):
        scaled = math.floor(value * scale + half)
    else:
        scaled = math.floor(Fraction(value) * scale + half)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def format_rational(value: RationalLike) -> str:
    return str(Fraction(value))


def format_quadratic(value: QuadraticNumber) -> str:
    if value.b == 0:
        return format_rational(value.a)
    joiner = "-" if value.b < 0 else "+"
    return f"({format_rational(value.a)} {joiner} {format_rational(abs(value.b))}*sqrt({value.d}))"


def format_exact(value: ExactNumber) -> str:
    if isinstance(value, QuadraticNumber):
        return format_quadratic(value)
    return format_rational(value)


def format_decimal(value: ExactNumber, digits: int = 6) -> str:
    return f"~{decimal_approximation(value, digits)}"
