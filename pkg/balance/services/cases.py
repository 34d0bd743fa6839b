"""
Constraint systems of the nine structural cases and their lower bounds.

Each case fixes the colours near the top-left corner of a grid and turns
path fractions into variables a..e. Linear cases are minimized exactly;
Cases 4 and 9 carry a log-concavity constraint and are settled by an exact
reduction in Q(sqrt(13)) and Q(sqrt(17)) respectively.
"""

import logging
from fractions import Fraction
from typing import Optional, Union

from balance.core.errors import VerificationError
from balance.core.exact import Ordering, QuadraticNumber, bracket_compare, format_exact
from balance.models.schemas import (
    Case4Report,
    Case9Report,
    CaseReport,
    Certificate,
    CheckResult,
    Constraint,
    LPSystem,
    NonlinearSystem,
    QuadraticConstraint,
)
from balance.services.lp import lp_minimize_exact, verify_certificate

logger = logging.getLogger(__name__)

Exact = Union[Fraction, QuadraticNumber]

LAMBDA = QuadraticNumber(Fraction(-3, 52), Fraction(5, 52), 17)
CASE4_OPTIMUM = QuadraticNumber(Fraction(-1, 17), Fraction(2, 17), 13)
CASE4_INFEASIBLE_AT = Fraction(9, 25)

STATED_BOUNDS: dict[int, Exact] = {
    1: Fraction(2, 5),
    2: Fraction(2, 5),
    3: Fraction(1, 2),
    4: CASE4_INFEASIBLE_AT,
    5: Fraction(2, 5),
    6: Fraction(5, 13),
    7: Fraction(7, 19),
    8: Fraction(9, 23),
    9: LAMBDA,
}
LINEAR_CASES = (1, 2, 3, 5, 6, 7, 8)


def _rel(label: str, relation: str, constant: int = 0, **coefficients: int) -> Constraint:
    return Constraint(
        coefficients={v: Fraction(x) for v, x in coefficients.items()},
        relation=relation,
        constant=Fraction(constant),
        label=label,
    )


def _case_1() -> LPSystem:
    return LPSystem(name="case 1", variables=["delta", "a", "b", "c", "d"], constraints=[
        _rel("δ ≥ b + d", ">=", 0, delta=1, b=-1, d=-1),
        _rel("2c + d ≥ 1 − δ", ">=", 1, c=2, d=1, delta=1),
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ c", ">=", 0, b=1, c=-1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("c ≥ 0", ">=", 0, c=1),
        _rel("a + b + d = 1", "=", 1, a=1, b=1, d=1),
    ])


def _case_2() -> LPSystem:
    return LPSystem(name="case 2", variables=["delta", "a", "b", "c", "d"], constraints=[
        _rel("δ ≥ b + d", ">=", 0, delta=1, b=-1, d=-1),
        _rel("2d ≥ 1 − δ", ">=", 1, d=2, delta=1),
        _rel("a + 2b + 2c ≥ 1 − δ", ">=", 1, a=1, b=2, c=2, delta=1),
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ c", ">=", 0, b=1, c=-1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("c ≥ 0", ">=", 0, c=1),
        _rel("a + 2b + 2d = 1", "=", 1, a=1, b=2, d=2),
    ])


def _case_3() -> LPSystem:
    return LPSystem(name="case 3", variables=["delta", "a", "b", "c"], constraints=[
        _rel("a ≥ 0", ">=", 0, a=1),
        _rel("b ≥ a", ">=", 0, b=1, a=-1),
        _rel("c ≥ b", ">=", 0, c=1, b=-1),
        _rel("b ≥ 1 − δ", ">=", 1, b=1, delta=1),
        _rel("b + c = 1", "=", 1, b=1, c=1),
    ])


def _case_4() -> NonlinearSystem:
    return NonlinearSystem(
        name="case 4",
        variables=["delta", "a", "b", "c", "d", "e"],
        constraints=[
            _rel("δ ≥ e", ">=", 0, delta=1, e=-1),
            _rel("δ ≥ a + c", ">=", 0, delta=1, a=-1, c=-1),
            _rel("a + 3b + δ ≥ 1", ">=", 1, a=1, b=3, delta=1),
            _rel("a ≥ b", ">=", 0, a=1, b=-1),
            _rel("b ≥ 0", ">=", 0, b=1),
            _rel("e ≥ d", ">=", 0, e=1, d=-1),
            _rel("d ≥ c", ">=", 0, d=1, c=-1),
            _rel("c ≥ b", ">=", 0, c=1, b=-1),
            _rel("a + c + d + e ≥ 1", ">=", 1, a=1, c=1, d=1, e=1),
        ],
        quadratic=[QuadraticConstraint(square="c", left="b", right="d", label="c² ≥ bd")],
    )


def _case_5() -> LPSystem:
    return LPSystem(name="case 5", variables=["delta", "a", "b", "c", "d", "e"], constraints=[
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ 0", ">=", 0, b=1),
        _rel("e ≥ d", ">=", 0, e=1, d=-1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("c ≥ b", ">=", 0, c=1, b=-1),
        _rel("3a + 3c + 2d + e = 1", "=", 1, a=3, c=3, d=2, e=1),
        _rel("2a + 2c + d ≥ 1 − δ", ">=", 1, a=2, c=2, d=1, delta=1),
        _rel("a + c ≤ δ", "<=", 0, a=1, c=1, delta=-1),
        _rel("3a ≥ 1 − δ", ">=", 1, a=3, delta=1),
        _rel("3b + 3c + 2d + e ≥ 1 − δ", ">=", 1, b=3, c=3, d=2, e=1, delta=1),
    ])


def _case_6() -> LPSystem:
    return LPSystem(name="case 6", variables=["delta", "a", "b", "c", "d"], constraints=[
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ 0", ">=", 0, b=1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("c ≥ b", ">=", 0, c=1, b=-1),
        _rel("3a + 3c + 2d = 1", "=", 1, a=3, c=3, d=2),
        _rel("2a + 2c + d ≥ 1 − δ", ">=", 1, a=2, c=2, d=1, delta=1),
        _rel("a + c ≤ δ", "<=", 0, a=1, c=1, delta=-1),
        _rel("3a ≥ 1 − δ", ">=", 1, a=3, delta=1),
        _rel("3b + 3c + 2d ≥ 1 − δ", ">=", 1, b=3, c=3, d=2, delta=1),
    ])


def _case_7() -> LPSystem:
    return LPSystem(name="case 7", variables=["delta", "a", "b", "c", "d", "e"], constraints=[
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ c", ">=", 0, b=1, c=-1),
        _rel("c ≥ 0", ">=", 0, c=1),
        _rel("e ≥ d", ">=", 0, e=1, d=-1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("a + 2b + 2d + e = 1", "=", 1, a=1, b=2, d=2, e=1),
        _rel("b + d + e ≤ δ", "<=", 0, b=1, d=1, e=1, delta=-1),
        _rel("a ≤ δ", "<=", 0, a=1, delta=-1),
        _rel("a + 2b ≥ 1 − δ", ">=", 1, a=1, b=2, delta=1),
        _rel("3c + 2d + e ≥ 1 − δ", ">=", 1, c=3, d=2, e=1, delta=1),
    ])


def _case_8() -> LPSystem:
    return LPSystem(name="case 8", variables=["delta", "a", "b", "c", "d"], constraints=[
        _rel("a ≥ b", ">=", 0, a=1, b=-1),
        _rel("b ≥ c", ">=", 0, b=1, c=-1),
        _rel("c ≥ 0", ">=", 0, c=1),
        _rel("d ≥ c", ">=", 0, d=1, c=-1),
        _rel("a + 3b + 3d = 1", "=", 1, a=1, b=3, d=3),
        _rel("b + d ≤ δ", "<=", 0, b=1, d=1, delta=-1),
        _rel("a + b + d ≤ δ", "<=", 0, a=1, b=1, d=1, delta=-1),
        _rel("a + 3b ≤ δ", "<=", 0, a=1, b=3, delta=-1),
        _rel("a + 3b + 3c ≥ 1 − δ", ">=", 1, a=1, b=3, c=3, delta=1),
    ])


def _case_9() -> NonlinearSystem:
    return NonlinearSystem(
        name="case 9",
        variables=["delta", "a", "b", "c", "d"],
        constraints=[
            _rel("δ ≥ b + d", ">=", 0, delta=1, b=-1, d=-1),
            _rel("δ ≥ a", ">=", 0, delta=1, a=-1),
            _rel("δ ≥ 2d", ">=", 0, delta=1, d=-2),
            _rel("3c + 2d + δ ≥ 1", ">=", 1, c=3, d=2, delta=1),
            _rel("a ≥ b", ">=", 0, a=1, b=-1),
            _rel("b ≥ c", ">=", 0, b=1, c=-1),
            _rel("c ≥ 0", ">=", 0, c=1),
            _rel("d ≥ c", ">=", 0, d=1, c=-1),
            _rel("a + 2b + 2d ≥ 1", ">=", 1, a=1, b=2, d=2),
        ],
        quadratic=[QuadraticConstraint(square="b", left="a", right="c", label="b² ≥ ac")],
    )


_BUILDERS = {
    1: _case_1, 2: _case_2, 3: _case_3, 4: _case_4, 5: _case_5,
    6: _case_6, 7: _case_7, 8: _case_8, 9: _case_9,
}

KNOWN_CERTIFICATES = {
    1: Certificate(
        multipliers=[Fraction(3, 5), Fraction(2, 5), 0, Fraction(3, 5), Fraction(1, 5), 0, 0],
        bound=Fraction(2, 5),
    ),
    2: Certificate(
        multipliers=[Fraction(2, 5), Fraction(2, 5), Fraction(1, 5), 0, Fraction(2, 5), 0, 0, Fraction(-1, 5)],
        bound=Fraction(2, 5),
    ),
}


def build_case_system(k: int) -> Union[LPSystem, NonlinearSystem]:
    """Constraint system of case k, relations in the order they are derived."""
    if k not in _BUILDERS:
        raise ValueError(f"Case must be in 1..9, got {k}")
    return _BUILDERS[k]()


# -- the two-fifths lemma ------------------------------------------------------


def twofifths_holds(delta: Exact) -> bool:
    return 2 * (1 - 2 * delta) <= delta


def twofifths_bound() -> Fraction:
    """Smallest delta with 2(1 - 2δ) <= δ."""
    system = LPSystem(
        name="two-fifths",
        variables=["delta"],
        constraints=[_rel("2(1 − 2δ) ≤ δ", "<=", -2, delta=-5)],
    )
    bound = lp_minimize_exact(system).optimum
    if not twofifths_holds(bound):
        raise VerificationError(f"Two-fifths bound {bound} fails its own inequality")
    return bound


def single_element_delta(length: int) -> Fraction:
    """delta of a chain of ``length`` elements beside one incomparable element."""
    if length < 1:
        raise ValueError("length must be positive")
    # the lone element lands in each of length + 1 gaps with equal probability
    gaps = length + 1
    return max(min(Fraction(i, gaps), 1 - Fraction(i, gaps)) for i in range(1, length + 1))


# -- Case 4 ------------------------------------------------------------------------


def case4_reduction(delta: Exact) -> dict[str, Exact]:
    """
    Bounds a solution must meet once delta is fixed.

    From a + c <= δ, a + c + d + e >= 1 and e <= δ we get d >= 1 - 2δ;
    a >= b and a >= 1 - δ - 3b with a <= δ - c confine b to [(1 - 2δ)/2, δ/2]
    and c to [b, min(3b - (1 - 2δ), δ - b)].
    """
    slack = 1 - 2 * delta
    return {"d_min": slack, "b_min": slack / 2, "b_max": delta / 2}


def case4_feasible(delta: Exact) -> Optional[dict[str, Exact]]:
    """
    A point of the Case 4 system at this delta, or None when there is none.

    Below 1/3 the reduction leaves no room for b: (1 - 2δ)/2 > δ/2.
    """
    system = build_case_system(4)
    bounds = case4_reduction(delta)
    if bounds["b_min"] > bounds["b_max"]:
        return None
    if delta >= Fraction(1, 2):
        quarter = Fraction(1, 4)
        point: dict[str, Exact] = {"delta": delta, "a": quarter, "b": quarter, "c": quarter, "d": quarter, "e": quarter}
    else:
        slack = 1 - 2 * delta
        # smallest b with (3b - slack)^2 >= slack * b and 3b >= slack
        b = slack * QuadraticNumber(7, 1, 13) / 18
        c = 3 * b - slack
        if 4 * b > 1 - delta:
            return None
        d = max(c, slack)
        point = {"delta": delta, "a": delta - c, "b": b, "c": c, "d": d, "e": delta}
    broken = system.violated(point)
    if broken:
        raise VerificationError(f"Case 4 witness at δ = {format_exact(delta)} breaks {broken}")
    return point


def _check_result(name: str, passed: bool, lhs: object = "", rhs: object = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=passed,
        lhs=format_exact(lhs) if isinstance(lhs, (int, Fraction, QuadraticNumber)) else str(lhs),
        rhs=format_exact(rhs) if isinstance(rhs, (int, Fraction, QuadraticNumber)) else str(rhs),
    )


def case4_analyze(steps: int = 40, samples: int = 100) -> Case4Report:
    """
    Infeasibility at 9/25, the exact threshold and a rational bracket around it.

    Returns:
        Case4Report; its checks cover the reduction, the boundary point and
        monotonicity of feasibility in delta
    """
    system = build_case_system(4)
    checks = []

    reduced = case4_reduction(CASE4_INFEASIBLE_AT)
    checks.append(_check_result(
        "reduction-interval",
        reduced["d_min"] == Fraction(7, 25) and (reduced["b_min"], reduced["b_max"]) == (Fraction(7, 50), Fraction(9, 50)),
        f"[{reduced['b_min']}, {reduced['b_max']}]", "[7/50, 9/50]",
    ))
    checks.append(_check_result("infeasible-at", case4_feasible(CASE4_INFEASIBLE_AT) is None, CASE4_INFEASIBLE_AT))
    checks.append(_check_result("feasible-at-half", case4_feasible(Fraction(1, 2)) is not None, Fraction(1, 2)))

    low, high = CASE4_INFEASIBLE_AT, Fraction(1, 2)
    for _ in range(steps):
        middle = (low + high) / 2
        if case4_feasible(middle) is None:
            low = middle
        else:
            high = middle
    checks.append(_check_result("bracket", low < CASE4_OPTIMUM <= high, f"({low}, {high}]", CASE4_OPTIMUM))

    delta = CASE4_OPTIMUM
    checks.append(_check_result("threshold-equation", 17 * delta * delta + 2 * delta - 3 == 0, delta))
    boundary = case4_feasible(delta)
    checks.append(_check_result("boundary-feasible", boundary is not None, delta))
    tight = []
    if boundary is not None:
        tight = [c.label for c in system.constraints if c.evaluate(boundary) == 0]
        tight.extend(q.label for q in system.quadratic if q.evaluate(boundary) == 0)
    checks.append(_check_result("exceeds-stated", delta > CASE4_INFEASIBLE_AT, delta, CASE4_INFEASIBLE_AT))

    pattern = [case4_feasible(Fraction(i, 2 * samples)) is not None for i in range(1, samples + 1)]
    monotone = all(not before or after for before, after in zip(pattern, pattern[1:]))
    checks.append(_check_result("monotone", monotone, f"{sum(pattern)} of {samples} feasible"))

    logger.debug(f"Case 4 threshold bracketed in ({low}, {high}]")
    return Case4Report(
        infeasible_at=CASE4_INFEASIBLE_AT,
        optimum=CASE4_OPTIMUM,
        bracket=(low, high),
        boundary_point=boundary or {},
        tight=tight,
        checks=checks,
    )


# -- Case 9 --------------------------------------------------------------------------


def case9_quadratic(lam: QuadraticNumber = LAMBDA) -> tuple[QuadraticNumber, QuadraticNumber, QuadraticNumber]:
    """Coefficients of 3(λ - y)^2 - (1 - 2λ)(1 - λ - 2y) in y, leading first."""
    return QuadraticNumber(3, 0, lam.d), 2 - 10 * lam, lam * lam + 3 * lam - 1


def case9_analyze() -> Case9Report:
    lam = LAMBDA
    lead, linear, constant = case9_quadratic(lam)
    small, large = (1 - lam) / 5, (53 * lam - 13) / 15

    def q(y: Exact) -> QuadraticNumber:
        return 3 * (lam - y) * (lam - y) - (1 - 2 * lam) * (1 - lam - 2 * y)

    half = lam / 2
    checks = [
        _check_result("minimal-polynomial", 26 * lam * lam + 3 * lam - 4 == 0, lam),
        _check_result("root-sum", linear == -lead * (small + large), linear, -lead * (small + large)),
        _check_result("root-product", constant == lead * small * large, constant, lead * small * large),
        _check_result("roots-vanish", q(small) == 0 and q(large) == 0),
        _check_result("roots-ordered", small < large, small, large),
        _check_result("large-root-beyond-half", large > half, large, half),
        _check_result("interval-nonempty", small < half, small, half),
        _check_result("negative-inside", q(half) < 0, q(half), 0),
        _check_result("lambda-below-half", lam < Fraction(1, 2), lam, Fraction(1, 2)),
        _check_result("lambda-above-two-sevenths", lam > Fraction(2, 7), lam, Fraction(2, 7)),
    ]
    return Case9Report(lam=lam, roots=(small, large), coefficients=(lead, linear, constant), checks=checks)


# -- every case ------------------------------------------------------------------------


def verify_cases() -> list[CaseReport]:
    """One CaseReport per case; linear cases are solved and their certificates re-checked."""
    reports = []
    for k in range(1, 10):
        stated = STATED_BOUNDS[k]
        if k in LINEAR_CASES:
            system = build_case_system(k)
            solution = lp_minimize_exact(system)
            verdict = verify_certificate(system, solution.certificate)
            passed = verdict.passed and solution.optimum >= stated and not system.violated(solution.point)
            detail = f"optimum {solution.optimum}"
            if k in KNOWN_CERTIFICATES:
                printed = verify_certificate(system, KNOWN_CERTIFICATES[k])
                passed = passed and printed.passed
                detail += f"; printed multipliers {'verified' if printed.passed else 'rejected: ' + printed.reason}"
            if not verdict.passed:
                detail += f"; dual certificate rejected: {verdict.reason}"
            reports.append(CaseReport(
                case=k, bound=solution.optimum, stated_bound=stated, passed=passed,
                method="exact simplex", detail=detail,
            ))
        elif k == 4:
            report = case4_analyze()
            failed = [c.name for c in report.checks if not c.passed]
            reports.append(CaseReport(
                case=4, bound=report.optimum, stated_bound=stated, passed=report.passed,
                method="reduction in Q(sqrt(13))",
                detail=f"infeasible at {report.infeasible_at}" + (f"; failed {failed}" if failed else ""),
            ))
        else:
            report9 = case9_analyze()
            failed = [c.name for c in report9.checks if not c.passed]
            reports.append(CaseReport(
                case=9, bound=report9.lam, stated_bound=stated, passed=report9.passed,
                method="root separation in Q(sqrt(17))",
                detail="interval ((1 - λ)/5, λ/2] excluded" + (f"; failed {failed}" if failed else ""),
            ))
        logger.debug(f"Case {k}: bound {format_exact(reports[-1].bound)}")
    return reports


def bounds_exceed_lambda(reports: list[CaseReport]) -> bool:
    """Every case bound is at least lambda, strictly for all but Case 9."""
    for report in reports:
        order = bracket_compare(report.bound, LAMBDA)
        if order == Ordering.LESS or (order == Ordering.EQUAL and report.case != 9):
            return False
    return True
