from __future__ import annotations

from fractions import Fraction

import pytest

from balance.core.errors import LPInfeasible
from balance.models.schemas import Certificate, Constraint, LPSystem
from balance.services.cases import KNOWN_CERTIFICATES, build_case_system
from balance.services.lp import lp_minimize_exact, verify_certificate


def _row(relation: str, constant, **coefficients) -> Constraint:
    return Constraint(
        coefficients={v: Fraction(x) for v, x in coefficients.items()},
        relation=relation,
        constant=Fraction(constant),
        label=f"{coefficients} {relation} {constant}",
    )


def _system(*constraints: Constraint, variables: tuple[str, ...] = ("delta", "x")) -> LPSystem:
    return LPSystem(name="test", variables=list(variables), constraints=list(constraints))


def test_small_program() -> None:
    system = _system(_row(">=", 1, delta=1, x=1), _row("<=", Fraction(1, 2), x=1))
    solution = lp_minimize_exact(system)
    assert solution.optimum == Fraction(1, 2)
    assert solution.point == {"delta": Fraction(1, 2), "x": Fraction(1, 2)}
    assert verify_certificate(system, solution.certificate).passed


def test_negative_constant_equality() -> None:
    system = _system(_row("=", Fraction(-1, 3), delta=-1), variables=("delta",))
    solution = lp_minimize_exact(system)
    assert solution.optimum == Fraction(1, 3)
    verdict = verify_certificate(system, solution.certificate)
    assert verdict.passed
    assert verdict.implied_bound == Fraction(1, 3)


def test_infeasible_program() -> None:
    system = _system(_row(">=", 2, x=1), _row("<=", 1, x=1))
    with pytest.raises(LPInfeasible):
        lp_minimize_exact(system)


@pytest.mark.parametrize("case", sorted(KNOWN_CERTIFICATES))
def test_known_certificates(case: int) -> None:
    verdict = verify_certificate(build_case_system(case), KNOWN_CERTIFICATES[case])
    assert verdict.passed, verdict.reason
    assert verdict.implied_bound == Fraction(2, 5)


def test_zero_multipliers_prove_nothing() -> None:
    system = build_case_system(1)
    verdict = verify_certificate(system, Certificate(multipliers=[0] * 7, bound=Fraction(2, 5)))
    assert not verdict.passed


def test_certificate_rejections() -> None:
    system = build_case_system(1)
    known = KNOWN_CERTIFICATES[1]

    wrong_bound = known.model_copy(update={"bound": Fraction(1, 2)})
    verdict = verify_certificate(system, wrong_bound)
    assert not verdict.passed
    assert verdict.implied_bound == Fraction(2, 5)

    negative = Certificate(multipliers=[-1] + known.multipliers[1:], bound=known.bound)
    assert "negative multiplier" in verify_certificate(system, negative).reason

    stray = known.model_copy(update={"variable_multipliers": {"z": Fraction(1)}})
    assert "unknown variables" in verify_certificate(system, stray).reason

    shifted = Certificate(multipliers=known.multipliers[1:] + [0], bound=known.bound)
    assert not verify_certificate(system, shifted).passed


def test_dimension_mismatch() -> None:
    with pytest.raises(ValueError, match="dimension mismatch"):
        verify_certificate(build_case_system(1), Certificate(multipliers=[1, 1], bound=Fraction(2, 5)))


@pytest.mark.parametrize("case", [1, 2, 3, 5, 6, 7, 8])
def test_solver_certificates_verify(case: int) -> None:
    system = build_case_system(case)
    solution = lp_minimize_exact(system)
    assert not system.violated(solution.point)
    assert verify_certificate(system, solution.certificate).passed
