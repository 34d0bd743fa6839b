"""Pydantic models for reports, constraint systems and certificates"""

from fractions import Fraction
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_validator,
    model_validator,
)

from balance.core.exact import QuadraticNumber, format_exact, format_rational


def _as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return Fraction(value)
    raise ValueError(f"Not an exact rational: {value!r}")


def _as_exact(value: Any) -> Union[Fraction, QuadraticNumber]:
    if isinstance(value, QuadraticNumber):
        return value
    return _as_fraction(value)


RationalValue = Annotated[
    Fraction,
    PlainValidator(_as_fraction),
    PlainSerializer(format_rational, return_type=str),
]
ExactValue = Annotated[
    Union[Fraction, QuadraticNumber],
    PlainValidator(_as_exact),
    PlainSerializer(format_exact, return_type=str),
]


class ExactModel(BaseModel):
    """Base model allowing Fraction / QuadraticNumber fields"""
    model_config = ConfigDict(arbitrary_types_allowed=True)


# -- posets and grids ------------------------------------------------------


class TwoChainDecomposition(ExactModel):
    """Partition of a width-2 poset into chains a_1 < ... < a_m and b_1 < ... < b_n"""
    model_config = ConfigDict(frozen=True)

    chain_a: tuple[int, ...] = Field(..., min_length=1, description="Elements a_1..a_m in increasing order")
    chain_b: tuple[int, ...] = Field(default=(), description="Elements b_1..b_n in increasing order")

    @model_validator(mode="after")
    def _disjoint(self) -> "TwoChainDecomposition":
        if set(self.chain_a) & set(self.chain_b) or len(set(self.chain_a)) != len(self.chain_a):
            raise ValueError("Chains must be disjoint lists of distinct elements")
        if len(set(self.chain_b)) != len(self.chain_b):
            raise ValueError("Chains must be disjoint lists of distinct elements")
        return self

    @property
    def m(self) -> int:
        return len(self.chain_a)

    @property
    def n(self) -> int:
        return len(self.chain_b)


class BalanceReport(ExactModel):
    """Balance constant of a poset with the pair attaining it"""
    delta: RationalValue = Field(..., description="delta(P) as an exact rational")
    witness: Optional[tuple[int, int]] = Field(None, description="Element pair attaining delta, none for chains")
    extension_count: int = Field(..., ge=0, description="Number of linear extensions e(P)")
    witness_cell: Optional[tuple[int, int]] = Field(None, description="Grid cell (i, j) behind the witness")
    method: Literal["grid", "oracle"] = Field("grid", description="How delta was computed")

    @field_validator("delta")
    @classmethod
    def _in_range(cls, value: Fraction) -> Fraction:
        if not 0 <= value <= Fraction(1, 2):
            raise ValueError(f"delta {value} outside [0, 1/2]")
        return value


class SRegion(ExactModel):
    """Cells with P(a_i < b_j) <= 1/2 and the lattice path on their border"""
    s_col_heights: list[int] = Field(..., description="Number of S cells per column, bottommost rows")
    boundary_path: list[tuple[int, int]] = Field(..., description="Points of the border path from (0,0) to (m,n)")


class LogConcavityReport(ExactModel):
    """Outcome of a log-concavity scan over path tables"""
    passed: bool
    table: Optional[str] = Field(None, description="'t' or 'r' for the first violation")
    axis: Optional[str] = Field(None, description="'row' or 'column'")
    line: Optional[int] = Field(None, description="Row or column index of the violation")
    index: Optional[int] = Field(None, description="Position inside the line")
    reason: str = ""


# -- linear and quadratic constraint systems -------------------------------


Relation = Literal["<=", ">=", "="]


class Constraint(ExactModel):
    """sum(coefficients[v] * v) <relation> constant"""
    coefficients: dict[str, RationalValue] = Field(..., description="Variable coefficients on the left side")
    relation: Relation
    constant: RationalValue = Field(Fraction(0), description="Right-hand side")
    label: str = Field("", description="The relation as written")

    def coefficient(self, variable: str) -> Fraction:
        return self.coefficients.get(variable, Fraction(0))

    def evaluate(self, point: dict[str, Any]) -> Any:
        """Left side minus right side at ``point``."""
        total: Any = -self.constant
        for variable, coefficient in self.coefficients.items():
            total = total + coefficient * point[variable]
        return total

    def holds_at(self, point: dict[str, Any]) -> bool:
        slack = self.evaluate(point)
        if self.relation == ">=":
            return slack >= 0
        if self.relation == "<=":
            return slack <= 0
        return slack == 0


class QuadraticConstraint(ExactModel):
    """square^2 >= left * right"""
    square: str
    left: str
    right: str
    label: str = ""

    def evaluate(self, point: dict[str, Any]) -> Any:
        return point[self.square] * point[self.square] - point[self.left] * point[self.right]

    def holds_at(self, point: dict[str, Any]) -> bool:
        return self.evaluate(point) >= 0


class LPSystem(ExactModel):
    """Linear constraint system over nonnegative variables; minimize the objective"""
    name: str
    variables: list[str] = Field(..., description="Variable names, objective included")
    constraints: list[Constraint]
    objective: str = Field("delta", description="Variable to minimize")

    @model_validator(mode="after")
    def _known_variables(self) -> "LPSystem":
        if self.objective not in self.variables:
            raise ValueError(f"Objective {self.objective} is not a variable")
        known = set(self.variables)
        for constraint in self.constraints:
            unknown = set(constraint.coefficients) - known
            if unknown:
                raise ValueError(f"Constraint '{constraint.label}' uses unknown variables {sorted(unknown)}")
        return self

    def violated(self, point: dict[str, Any]) -> list[str]:
        bad = [c.label for c in self.constraints if not c.holds_at(point)]
        bad.extend(f"{v} >= 0" for v in self.variables if point[v] < 0)
        return bad


class NonlinearSystem(LPSystem):
    """Linear system plus constraints of the form x^2 >= y*z"""
    quadratic: list[QuadraticConstraint] = Field(default_factory=list)

    def violated(self, point: dict[str, Any]) -> list[str]:
        bad = super().violated(point)
        bad.extend(q.label for q in self.quadratic if not q.holds_at(point))
        return bad


class Certificate(ExactModel):
    """Multipliers whose weighted sum of constraints yields delta >= bound"""
    multipliers: list[RationalValue] = Field(..., description="One multiplier per constraint")
    bound: RationalValue = Field(..., description="Implied lower bound on the objective")
    variable_multipliers: dict[str, RationalValue] = Field(
        default_factory=dict, description="Nonnegative weights on the implicit v >= 0 constraints"
    )


class CertificateVerdict(ExactModel):
    passed: bool
    implied_bound: Optional[RationalValue] = None
    reason: str = ""


class LPSolution(ExactModel):
    """Exact optimum, optimal point and dual certificate"""
    optimum: RationalValue
    point: dict[str, RationalValue]
    certificate: Certificate


# -- verification reports --------------------------------------------------


class CheckResult(ExactModel):
    """One named check; m is the index it ran at, if any"""
    name: str
    m: Optional[int] = None
    passed: bool
    lhs: str = ""
    rhs: str = ""
    detail: str = ""

    def line(self) -> str:
        index = "-" if self.m is None else str(self.m)
        return f"CHECK {self.name} {index} {'PASS' if self.passed else 'FAIL'}"


class AppendixReport(ExactModel):
    """Every appendix check run for one T_n"""
    n: int
    checks: list[CheckResult]
    interior_form: str = Field(..., description="Form of t[2m+9][2m+10] the DP produced")

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


class CaseReport(ExactModel):
    """Certified lower bound for one case of the structural argument"""
    case: int = Field(..., ge=1, le=9)
    bound: ExactValue = Field(..., description="Bound established by this run")
    stated_bound: ExactValue = Field(..., description="Bound the argument needs")
    passed: bool
    method: str
    detail: str = ""

    def line(self) -> str:
        return f"CASE {self.case} BOUND {format_exact(self.bound)} STATUS {'PASS' if self.passed else 'FAIL'}"


class Case4Report(ExactModel):
    infeasible_at: RationalValue
    optimum: ExactValue
    bracket: tuple[RationalValue, RationalValue] = Field(..., description="Rational interval holding the threshold")
    boundary_point: dict[str, ExactValue] = Field(..., description="Feasible point at the threshold")
    tight: list[str] = Field(default_factory=list, description="Constraints holding with equality there")
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class Case9Report(ExactModel):
    lam: ExactValue
    roots: tuple[ExactValue, ExactValue]
    coefficients: tuple[ExactValue, ExactValue, ExactValue] = Field(..., description="Quadratic in y, leading first")
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


# -- T_n family --------------------------------------------------------------


class TnState(ExactModel):
    """Sequences a_m, b_m read off the T_n path tables"""
    n: int = Field(..., ge=1)
    a: list[int] = Field(..., description="a_1..a_{n+1}")
    b: list[int] = Field(..., description="b_1..b_{n+1}")
    f: list[RationalValue] = Field(..., description="f_m = a_m / b_m")
    p: int = Field(..., description="e(T_n)")

    @model_validator(mode="after")
    def _lengths(self) -> "TnState":
        if not len(self.a) == len(self.b) == len(self.f) == self.n + 1:
            raise ValueError("Sequences must have n+1 terms")
        return self


# -- search ----------------------------------------------------------------------


class SpectrumRecord(ExactModel):
    key: str = Field(..., description="Canonical key, hex encoded")
    delta: RationalValue
    is_aigner: bool
    is_direct_sum: bool = False
    size: int
    poset: str = Field("", description="Poset in file format")

    def line(self) -> str:
        return f"{self.key}\t{format_rational(self.delta)}\t{int(self.is_aigner)}"


class SpectrumReport(ExactModel):
    """delta over every width-2 poset up to a size bound"""
    max_size: int
    records: list[SpectrumRecord]
    min_non_aigner_delta: Optional[RationalValue] = None
    min_non_aigner_key: Optional[str] = None
    distinct_deltas: list[RationalValue] = Field(default_factory=list)
    cached: int = Field(0, description="Records served from the cache file")
