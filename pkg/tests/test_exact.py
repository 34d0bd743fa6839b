from __future__ import annotations

import math
import random
from functools import cmp_to_key
from fractions import Fraction

import pytest

from balance.core.exact import (
    Ordering,
    QuadraticNumber,
    bracket_compare,
    decimal_approximation,
    exact_compare,
    format_decimal,
    format_exact,
    quad_arith,
    quad_compare,
    rat_compare,
)
from balance.services.cases import CASE4_OPTIMUM, LAMBDA
from balance.services.family import ALPHA, BETA, SQRT57


def _quad(a, b, d: int) -> QuadraticNumber:
    return QuadraticNumber(Fraction(a), Fraction(b), d)


@pytest.mark.parametrize(
    ("x", "y", "expected"),
    [
        (Fraction(1, 3), Fraction(1, 3), Ordering.EQUAL),
        (Fraction(2, 5), Fraction(5, 13), Ordering.GREATER),
        (Fraction(9, 23), Fraction(7, 19), Ordering.GREATER),
        (Fraction(7, 19), Fraction(9, 23), Ordering.LESS),
        (1, Fraction(2, 2), Ordering.EQUAL),
    ],
)
def test_rational_order(x, y, expected) -> None:
    assert rat_compare(x, y) == expected


def test_lambda_exceeds_one_third() -> None:
    assert quad_compare(LAMBDA, Fraction(1, 3)) == Ordering.GREATER
    assert quad_compare(Fraction(1, 3), LAMBDA) == Ordering.LESS
    assert quad_compare(_quad(1, 0, 17), _quad(1, 0, 17)) == Ordering.EQUAL


def test_different_radicands_are_incomparable_exactly() -> None:
    with pytest.raises(ValueError, match="incomparable representation"):
        quad_compare(BETA, LAMBDA)
    with pytest.raises(ValueError, match="incomparable representation"):
        BETA - LAMBDA


def test_bracketing_orders_across_fields() -> None:
    assert bracket_compare(BETA, LAMBDA) == Ordering.GREATER
    assert bracket_compare(CASE4_OPTIMUM, LAMBDA) == Ordering.GREATER
    assert bracket_compare(LAMBDA, CASE4_OPTIMUM) == Ordering.LESS
    assert bracket_compare(Fraction(2, 5), LAMBDA) == Ordering.GREATER


def test_field_arithmetic() -> None:
    assert SQRT57 ** 2 == 57
    assert ALPHA * ALPHA.conjugate() == 6
    assert LAMBDA + 0 == LAMBDA
    assert ALPHA * ALPHA.inverse() == 1
    assert (ALPHA / ALPHA) == 1
    assert 1 - LAMBDA == _quad(Fraction(55, 52), Fraction(-5, 52), 17)
    assert quad_arith(LAMBDA, 2, "×") == LAMBDA + LAMBDA
    assert quad_arith(1, LAMBDA, "−") == 1 - LAMBDA
    assert 26 * LAMBDA * LAMBDA + 3 * LAMBDA - 4 == 0


def test_rational_elements_compare_across_radicands() -> None:
    assert _quad(1, 0, 13) == _quad(1, 0, 17)
    assert _quad(Fraction(1, 2), 0, 13) == Fraction(1, 2)


def test_radicand_must_be_square_free() -> None:
    with pytest.raises(ValueError):
        QuadraticNumber(1, 1, 4)
    with pytest.raises(ValueError):
        QuadraticNumber(1, 1, 1)


def test_sign_of_mixed_terms() -> None:
    assert _quad(-3, 1, 17).sign() == 1
    assert _quad(5, -2, 7).sign() == -1
    assert _quad(0, 0, 7).sign() == 0
    assert _quad(-4, 1, 17).sign() == 1
    assert _quad(-5, 1, 17).sign() == -1


def test_floor() -> None:
    assert math.floor(ALPHA) == 8
    assert math.floor(-ALPHA) == -9
    assert math.floor(LAMBDA * 1000) == 338


def test_zero_has_no_inverse() -> None:
    with pytest.raises(ZeroDivisionError):
        _quad(0, 0, 17).inverse()


def test_exact_compare_dispatch() -> None:
    assert exact_compare(Fraction(1, 2), Fraction(1, 2)) == Ordering.EQUAL
    assert exact_compare(LAMBDA, Fraction(1, 2)) == Ordering.LESS


def test_decimal_rounding() -> None:
    assert decimal_approximation(Fraction(1, 3)) == "0.333333"
    assert decimal_approximation(Fraction(2, 3)) == "0.666667"
    assert decimal_approximation(Fraction(-1, 3)) == "-0.333333"
    assert decimal_approximation(Fraction(1, 2), 0) == "1"
    assert decimal_approximation(LAMBDA) == "0.338760"
    assert format_decimal(Fraction(2, 5)) == "~0.400000"
    with pytest.raises(ValueError):
        decimal_approximation(Fraction(1, 3), -1)


def test_exact_formatting() -> None:
    assert format_exact(Fraction(9, 23)) == "9/23"
    assert format_exact(LAMBDA) == "(-3/52 + 5/52*sqrt(17))"
    assert format_exact(_quad(1, -2, 13)) == "(1 - 2*sqrt(13))"
    assert str(_quad(3, 0, 13)) == "3"


def test_published_decimals() -> None:
    assert decimal_approximation(LAMBDA, 5) == "0.33876"
    assert decimal_approximation(BETA, 6) == "0.348843"


def _random_fraction(rng: random.Random, bound: int = 10 ** 6) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def _random_quad(rng: random.Random, d: int) -> QuadraticNumber:
    return QuadraticNumber(_random_fraction(rng, 50), _random_fraction(rng, 50), d)


def _check_rational_order(seed: int, count: int) -> None:
    rng = random.Random(seed)
    for _ in range(count):
        x, y = _random_fraction(rng), _random_fraction(rng)
        expected = Ordering.LESS if x < y else Ordering.GREATER if x > y else Ordering.EQUAL
        assert rat_compare(x, y) == expected
        assert rat_compare(x, x) == Ordering.EQUAL


def _check_quadratic_order(seed: int, count: int) -> None:
    rng = random.Random(seed)
    for _ in range(count):
        d = rng.choice([2, 3, 13, 17, 57])
        x, y, z = (_random_quad(rng, d) for _ in range(3))
        xy, yx = quad_compare(x, y), quad_compare(y, x)
        assert xy.value == -yx.value
        approx = float(x.a - y.a) + float(x.b - y.b) * math.sqrt(d)
        if abs(approx) > 1e-6:
            assert xy == (Ordering.GREATER if approx > 0 else Ordering.LESS)
        low, mid, high = sorted([x, y, z], key=cmp_to_key(quad_compare))
        assert quad_compare(low, mid) != Ordering.GREATER
        assert quad_compare(mid, high) != Ordering.GREATER
        assert quad_compare(low, high) != Ordering.GREATER
        other = rng.choice([e for e in (2, 3, 13, 17, 57) if e != d])
        irrational = QuadraticNumber(x.a, x.b or 1, d)
        foreign = QuadraticNumber(rng.randint(-9, 9), rng.randint(1, 9), other)
        with pytest.raises(ValueError, match="incomparable representation"):
            quad_compare(irrational, foreign)


def test_random_rational_order() -> None:
    _check_rational_order(seed=7, count=500)


def test_random_quadratic_order() -> None:
    _check_quadratic_order(seed=11, count=200)


@pytest.mark.slow
def test_random_order_large() -> None:
    _check_rational_order(seed=2024, count=20000)
    _check_quadratic_order(seed=2025, count=5000)
