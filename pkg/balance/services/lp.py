"""
Exact two-phase simplex over Fractions, with dual certificates.

All variables are nonnegative. The solver minimizes a single variable (delta)
and returns the multipliers that turn the constraint system into the
inequality delta >= optimum, which verify_certificate re-checks on its own.
"""

import logging
from fractions import Fraction
from typing import Optional

from balance.core.errors import LPInfeasible, LPUnbounded
from balance.models.schemas import Certificate, CertificateVerdict, Constraint, LPSolution, LPSystem

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
FLIPPED = {"<=": ">=", ">=": "<=", "=": "="}


class _Tableau:
    """Dense tableau; the last entry of each row is the right-hand side."""

    def __init__(self, system: LPSystem) -> None:
        self.variables = list(system.variables)
        self.rows: list[list[Fraction]] = []
        self.relations: list[str] = []
        self.flips: list[int] = []
        self.basis: list[int] = []
        self.identity: list[int] = []
        self.artificial: set[int] = set()

        count = len(self.variables)
        extra = sum(2 if self._normalized(c)[1] == ">=" else 1 for c in system.constraints)
        width = count + extra
        column = count
        for constraint in system.constraints:
            (coefficients, constant), relation = self._normalized(constraint)
            row = coefficients + [ZERO] * extra + [constant]
            if relation == "<=":
                row[column] = Fraction(1)
                self.basis.append(column)
                self.identity.append(column)
                column += 1
            else:
                if relation == ">=":
                    row[column] = Fraction(-1)
                    column += 1
                row[column] = Fraction(1)
                self.basis.append(column)
                self.identity.append(column)
                self.artificial.add(column)
                column += 1
            self.rows.append(row)
            self.relations.append(relation)
            self.flips.append(-1 if constraint.constant < 0 else 1)
        self.width = width

    def _normalized(self, constraint: Constraint) -> tuple[tuple[list[Fraction], Fraction], str]:
        coefficients = [constraint.coefficient(v) for v in self.variables]
        if constraint.constant < 0:
            return ([-x for x in coefficients], -constraint.constant), FLIPPED[constraint.relation]
        return (coefficients, constraint.constant), constraint.relation

    def pivot(self, row_index: int, column: int) -> None:
        pivot_row = self.rows[row_index]
        value = pivot_row[column]
        pivot_row[:] = [x / value for x in pivot_row]
        for k, row in enumerate(self.rows):
            if k != row_index and row[column] != 0:
                factor = row[column]
                row[:] = [x - factor * y for x, y in zip(row, pivot_row)]
        self.basis[row_index] = column

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        reduced = list(cost)
        for k, row in enumerate(self.rows):
            weight = cost[self.basis[k]]
            if weight:
                for j in range(self.width):
                    reduced[j] -= weight * row[j]
        return reduced

    def objective_value(self, cost: list[Fraction]) -> Fraction:
        return sum((cost[self.basis[k]] * row[-1] for k, row in enumerate(self.rows)), ZERO)

    def optimize(self, cost: list[Fraction], allowed: set[int]) -> int:
        """Bland's rule pivots until optimal; returns the pivot count."""
        pivots = 0
        while True:
            reduced = self.reduced_costs(cost)
            entering = next((j for j in sorted(allowed) if reduced[j] < 0), None)
            if entering is None:
                return pivots
            best: Optional[tuple[Fraction, int, int]] = None
            for k, row in enumerate(self.rows):
                if row[entering] > 0:
                    candidate = (row[-1] / row[entering], self.basis[k], k)
                    if best is None or candidate < best:
                        best = candidate
            if best is None:
                raise LPUnbounded(f"Objective unbounded below along column {entering}")
            self.pivot(best[2], entering)
            pivots += 1

    def drive_out_artificials(self) -> None:
        for k, row in enumerate(self.rows):
            if self.basis[k] not in self.artificial:
                continue
            column = next(
                (j for j in range(self.width) if j not in self.artificial and row[j] != 0), None
            )
            if column is not None:
                self.pivot(k, column)


def lp_minimize_exact(system: LPSystem) -> LPSolution:
    """
    Minimize the objective variable of ``system`` exactly.

    Args:
        system: Constraints over nonnegative variables

    Returns:
        LPSolution with the optimum, an optimal point and a dual certificate
    """
    tableau = _Tableau(system)
    structural = set(range(len(tableau.variables)))
    ordinary = set(range(tableau.width)) - tableau.artificial

    phase_one = [Fraction(1) if j in tableau.artificial else ZERO for j in range(tableau.width)]
    pivots = tableau.optimize(phase_one, set(range(tableau.width)))
    if tableau.objective_value(phase_one) > 0:
        raise LPInfeasible(f"System '{system.name}' has no feasible point")
    tableau.drive_out_artificials()

    objective = tableau.variables.index(system.objective)
    phase_two = [ZERO] * tableau.width
    phase_two[objective] = Fraction(1)
    pivots += tableau.optimize(phase_two, ordinary)
    optimum = tableau.objective_value(phase_two)

    point = {v: ZERO for v in tableau.variables}
    for k, column in enumerate(tableau.basis):
        if column in structural:
            point[tableau.variables[column]] = tableau.rows[k][-1]

    duals = [
        sum((phase_two[tableau.basis[k]] * row[column] for k, row in enumerate(tableau.rows)), ZERO)
        for column in tableau.identity
    ]
    multipliers = []
    for dual, relation, flip in zip(duals, tableau.relations, tableau.flips):
        if relation == ">=":
            multipliers.append(dual)
        elif relation == "<=":
            multipliers.append(-dual)
        else:
            multipliers.append(dual * flip)

    reduced = tableau.reduced_costs(phase_two)
    variable_multipliers = {
        v: reduced[j] for j, v in enumerate(tableau.variables) if v != system.objective and reduced[j] != 0
    }
    logger.debug(f"Solved '{system.name}' in {pivots} pivots: optimum {optimum}")
    return LPSolution(
        optimum=optimum,
        point=point,
        certificate=Certificate(multipliers=multipliers, bound=optimum, variable_multipliers=variable_multipliers),
    )


def verify_certificate(system: LPSystem, certificate: Certificate) -> CertificateVerdict:
    """
    Check that the weighted constraints add up to k*delta + c0 >= 0 with k > 0.

    Each constraint contributes multiplier * g where g >= 0 (or g = 0 for
    equalities) on every feasible point; variable multipliers add s_v * v.
    Every variable except the objective must cancel.
    """
    if len(certificate.multipliers) != len(system.constraints):
        raise ValueError(
            f"dimension mismatch: {len(certificate.multipliers)} multipliers for "
            f"{len(system.constraints)} constraints"
        )
    for index, (multiplier, constraint) in enumerate(zip(certificate.multipliers, system.constraints)):
        if constraint.relation != "=" and multiplier < 0:
            return CertificateVerdict(
                passed=False, reason=f"negative multiplier on inequality {index + 1} ({constraint.label})"
            )
    unknown = set(certificate.variable_multipliers) - set(system.variables)
    if unknown:
        return CertificateVerdict(passed=False, reason=f"unknown variables {sorted(unknown)}")
    if any(weight < 0 for weight in certificate.variable_multipliers.values()):
        return CertificateVerdict(passed=False, reason="negative variable multiplier")

    combined = {v: Fraction(certificate.variable_multipliers.get(v, 0)) for v in system.variables}
    constant = ZERO
    for multiplier, constraint in zip(certificate.multipliers, system.constraints):
        sign = -1 if constraint.relation == "<=" else 1
        for variable, coefficient in constraint.coefficients.items():
            combined[variable] += sign * multiplier * coefficient
        constant -= sign * multiplier * constraint.constant

    leftover = {v: x for v, x in combined.items() if v != system.objective and x != 0}
    if leftover:
        return CertificateVerdict(passed=False, reason=f"variables not eliminated: {sorted(leftover)}")
    scale = combined[system.objective]
    if scale <= 0:
        return CertificateVerdict(passed=False, reason=f"objective coefficient {scale} is not positive")
    implied = -constant / scale
    if implied != certificate.bound:
        return CertificateVerdict(
            passed=False, implied_bound=implied, reason=f"combination implies {implied}, not {certificate.bound}"
        )
    return CertificateVerdict(passed=True, implied_bound=implied)
