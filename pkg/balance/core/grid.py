"""
Grid diagrams of width-2 posets and the lattice-path engine.

Given chains a_1 < ... < a_m and b_1 < ... < b_n, a linear extension is a
down-right path from (0,0) to (m,n): a vertical step into row i places a_i,
a horizontal step into column j places b_j. Cell C_{i,j} is red when
a_i < b_j and blue when b_j < a_i; valid paths stay between the two regions.
"""

import logging
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from balance.core.errors import PosetError, VerificationError
from balance.core.poset import Poset
from balance.models.schemas import (
    BalanceReport,
    LogConcavityReport,
    SRegion,
    TwoChainDecomposition,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class GridDiagram(BaseModel):
    """m x n grid with a right/top-justified red region and a left/bottom-justified blue region"""
    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=0, description="Rows, one per element of the first chain")
    n: int = Field(..., ge=0, description="Columns, one per element of the second chain")
    red_row_lengths: tuple[int, ...] = Field(..., description="Red cells per row, rightmost columns")
    blue_col_heights: tuple[int, ...] = Field(..., description="Blue cells per column, bottommost rows")
    decomposition: Optional[TwoChainDecomposition] = Field(None, description="Element labels of the rows and columns")

    @model_validator(mode="after")
    def _young_shapes(self) -> "GridDiagram":
        if len(self.red_row_lengths) != self.m or len(self.blue_col_heights) != self.n:
            raise ValueError("Staircase lengths do not match the grid dimensions")
        if any(not 0 <= v <= self.n for v in self.red_row_lengths):
            raise ValueError("Red row length out of range")
        if any(not 0 <= v <= self.m for v in self.blue_col_heights):
            raise ValueError("Blue column height out of range")
        if any(x < y for x, y in zip(self.red_row_lengths, self.red_row_lengths[1:])):
            raise ValueError("Red region is not a Young diagram")
        if any(x < y for x, y in zip(self.blue_col_heights, self.blue_col_heights[1:])):
            raise ValueError("Blue region is not a Young diagram")
        for i in range(1, self.m + 1):
            if self.blue_width(i) + self.red_row_lengths[i - 1] > self.n:
                raise ValueError(f"Red and blue regions overlap in row {i}")
        if self.decomposition is not None and (
            self.decomposition.m != self.m or self.decomposition.n != self.n
        ):
            raise ValueError("Decomposition does not match the grid dimensions")
        return self

    def blue_width(self, i: int) -> int:
        """Number of blue cells in row i (leftmost columns)."""
        threshold = self.m - i + 1
        return sum(1 for h in self.blue_col_heights if h >= threshold)

    @cached_property
    def blue_row_widths(self) -> tuple[int, ...]:
        return tuple(self.blue_width(i) for i in range(1, self.m + 1))

    @cached_property
    def red_col_depths(self) -> tuple[int, ...]:
        """Number of red cells in each column (topmost rows)."""
        return tuple(
            sum(1 for r in self.red_row_lengths if r >= self.n - j + 1) for j in range(1, self.n + 1)
        )

    def is_red(self, i: int, j: int) -> bool:
        return j > self.n - self.red_row_lengths[i - 1]

    def is_blue(self, i: int, j: int) -> bool:
        return i > self.m - self.blue_col_heights[j - 1]

    def color(self, i: int, j: int) -> str:
        if self.is_red(i, j):
            return "R"
        if self.is_blue(i, j):
            return "B"
        return "."

    def vertical_step_allowed(self, i: int, j: int) -> bool:
        """Step (i-1, j) -> (i, j), placing a_i after b_1..b_j."""
        return self.blue_row_widths[i - 1] <= j <= self.n - self.red_row_lengths[i - 1]

    def horizontal_step_allowed(self, i: int, j: int) -> bool:
        """Step (i, j-1) -> (i, j), placing b_j after a_1..a_i."""
        return self.red_col_depths[j - 1] <= i <= self.m - self.blue_col_heights[j - 1]

    def element_pair(self, i: int, j: int) -> tuple[int, int]:
        if self.decomposition is not None:
            return self.decomposition.chain_a[i - 1], self.decomposition.chain_b[j - 1]
        return i - 1, self.m + j - 1


def build_grid(poset: Poset, decomposition: TwoChainDecomposition) -> GridDiagram:
    """Colour C_{i,j} red iff a_i < b_j and blue iff b_j < a_i."""
    chain_a, chain_b = decomposition.chain_a, decomposition.chain_b
    if sorted(chain_a + chain_b) != list(range(poset.size)):
        raise PosetError("Decomposition does not partition the poset")
    for strand in (chain_a, chain_b):
        if any(not poset.less(x, y) for x, y in zip(strand, strand[1:])):
            raise PosetError("Decomposition lists are not increasing chains")
    red = tuple(sum(1 for b in chain_b if poset.less(a, b)) for a in chain_a)
    blue = tuple(sum(1 for a in chain_a if poset.less(b, a)) for b in chain_b)
    try:
        grid = GridDiagram(
            m=len(chain_a), n=len(chain_b), red_row_lengths=red, blue_col_heights=blue,
            decomposition=decomposition,
        )
    except ValidationError as exc:
        raise VerificationError("decomposition inconsistent with poset") from exc
    for i in range(1, grid.m + 1):
        for j in range(1, grid.n + 1):
            a, b = chain_a[i - 1], chain_b[j - 1]
            if grid.is_red(i, j) != poset.less(a, b) or grid.is_blue(i, j) != poset.less(b, a):
                raise VerificationError("decomposition inconsistent with poset")
    return grid


def poset_from_grid(grid: GridDiagram) -> tuple[Poset, TwoChainDecomposition]:
    """The poset of a grid: a_i is element i-1, b_j is element m+j-1."""
    m, n = grid.m, grid.n
    size = m + n
    matrix = [[False] * size for _ in range(size)]
    for i in range(m):
        for k in range(i + 1, m):
            matrix[i][k] = True
    for j in range(n):
        for k in range(j + 1, n):
            matrix[m + j][m + k] = True
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if grid.is_red(i, j):
                matrix[i - 1][m + j - 1] = True
            elif grid.is_blue(i, j):
                matrix[m + j - 1][i - 1] = True
    decomposition = TwoChainDecomposition(chain_a=tuple(range(m)), chain_b=tuple(range(m, size)))
    return Poset(size, matrix), decomposition


class PathTables:
    """Forward counts t[i][j] and backward counts r[i][j] of valid partial paths."""

    __slots__ = ("grid", "t", "r")

    def __init__(self, grid: GridDiagram, t: list[list[int]], r: list[list[int]]) -> None:
        self.grid = grid
        self.t = t
        self.r = r

    @property
    def extension_count(self) -> int:
        return self.t[self.grid.m][self.grid.n]

    def paths_through(self, i: int, j: int) -> int:
        return self.t[i][j] * self.r[i][j]

    def _check_cell(self, i: int, j: int) -> None:
        if not (1 <= i <= self.grid.m and 1 <= j <= self.grid.n):
            raise IndexError(f"Cell ({i}, {j}) out of range for a {self.grid.m}x{self.grid.n} grid")

    def column_crossings(self, j: int) -> list[int]:
        """Paths crossing from column j-1 to column j at each row 0..m."""
        return [self.t[k][j - 1] * self.r[k][j] for k in range(self.grid.m + 1)]

    def count_below(self, i: int, j: int) -> int:
        self._check_cell(i, j)
        return sum(self.column_crossings(j)[i:])

    def count_above(self, i: int, j: int) -> int:
        self._check_cell(i, j)
        return sum(self.column_crossings(j)[:i])


def path_tables(grid: GridDiagram) -> PathTables:
    m, n = grid.m, grid.n
    v_lo = grid.blue_row_widths
    v_hi = [n - length for length in grid.red_row_lengths]
    h_lo = grid.red_col_depths
    h_hi = [m - height for height in grid.blue_col_heights]

    t = [[0] * (n + 1) for _ in range(m + 1)]
    t[0][0] = 1
    for i in range(m + 1):
        row = t[i]
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            total = 0
            if i > 0 and v_lo[i - 1] <= j <= v_hi[i - 1]:
                total += t[i - 1][j]
            if j > 0 and h_lo[j - 1] <= i <= h_hi[j - 1]:
                total += row[j - 1]
            row[j] = total

    r = [[0] * (n + 1) for _ in range(m + 1)]
    r[m][n] = 1
    for i in range(m, -1, -1):
        row = r[i]
        for j in range(n, -1, -1):
            if i == m and j == n:
                continue
            total = 0
            if i < m and v_lo[i] <= j <= v_hi[i]:
                total += r[i + 1][j]
            if j < n and h_lo[j] <= i <= h_hi[j]:
                total += row[j + 1]
            row[j] = total

    logger.debug(f"Path tables for {m}x{n} grid: e(P) = {t[m][n]}")
    return PathTables(grid, t, r)


def count_below(tables: PathTables, i: int, j: int) -> int:
    """Valid paths passing below C_{i,j}, i.e. with a_i placed before b_j."""
    return tables.count_below(i, j)


def count_above(tables: PathTables, i: int, j: int) -> int:
    return tables.count_above(i, j)


def column_below_counts(tables: PathTables, j: int) -> list[int]:
    """count_below(i, j) for i = 0..m via a suffix sum over the crossings."""
    crossings = tables.column_crossings(j)
    suffix = [0] * (len(crossings) + 1)
    for k in range(len(crossings) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + crossings[k]
    return suffix


def probability_matrix(grid: GridDiagram, tables: Optional[PathTables] = None) -> list[list[Fraction]]:
    """Entry (i-1, j-1) is P(a_i < b_j) in a uniform linear extension."""
    tables = tables or path_tables(grid)
    total = tables.extension_count
    columns = [column_below_counts(tables, j) for j in range(1, grid.n + 1)]
    return [
        [Fraction(columns[j - 1][i], total) for j in range(1, grid.n + 1)]
        for i in range(1, grid.m + 1)
    ]


def delta_grid(grid: GridDiagram, tables: Optional[PathTables] = None) -> BalanceReport:
    """
    delta(P) as the best min(below, above) over all cells.

    Ties prefer a cell with P(a_i < b_j) <= 1/2, then the smallest (i, j).
    """
    tables = tables or path_tables(grid)
    total = tables.extension_count
    best_key = None
    for j in range(1, grid.n + 1):
        below = column_below_counts(tables, j)
        for i in range(1, grid.m + 1):
            value = min(below[i], total - below[i])
            key = (-value, 0 if 2 * below[i] <= total else 1, i, j)
            if best_key is None or key < best_key:
                best_key = key
    if best_key is None or best_key[0] == 0:
        return BalanceReport(delta=Fraction(0), witness=None, extension_count=total)
    i, j = best_key[2], best_key[3]
    return BalanceReport(
        delta=Fraction(-best_key[0], total),
        witness=grid.element_pair(i, j),
        extension_count=total,
        witness_cell=(i, j),
    )


def s_region(grid: GridDiagram, tables: Optional[PathTables] = None) -> SRegion:
    """Cells with P(a_i < b_j) <= 1/2 and the border path of that region."""
    matrix = probability_matrix(grid, tables)
    m, n = grid.m, grid.n
    heights = []
    for j in range(1, n + 1):
        column = [matrix[i - 1][j - 1] <= HALF for i in range(1, m + 1)]
        height = sum(column)
        if column != [False] * (m - height) + [True] * height:
            raise VerificationError(f"S region is not bottom-justified in column {j}")
        for i in range(1, m + 1):
            if grid.is_blue(i, j) and not column[i - 1]:
                raise VerificationError(f"Blue cell ({i}, {j}) lies outside S")
            if grid.is_red(i, j) and column[i - 1]:
                raise VerificationError(f"Red cell ({i}, {j}) lies inside S")
        heights.append(height)
    if any(x < y for x, y in zip(heights, heights[1:])):
        raise VerificationError("S region is not left-justified")

    path = [(0, 0)]
    row = 0
    for j in range(1, n + 1):
        while row < m - heights[j - 1]:
            row += 1
            if not grid.vertical_step_allowed(row, j - 1):
                raise VerificationError(f"Border path leaves the valid region at ({row}, {j - 1})")
            path.append((row, j - 1))
        if not grid.horizontal_step_allowed(row, j):
            raise VerificationError(f"Border path leaves the valid region at ({row}, {j})")
        path.append((row, j))
    while row < m:
        row += 1
        if not grid.vertical_step_allowed(row, n):
            raise VerificationError(f"Border path leaves the valid region at ({row}, {n})")
        path.append((row, n))
    return SRegion(s_col_heights=heights, boundary_path=path)


def detect_direct_sum(grid: GridDiagram) -> list[tuple[int, int]]:
    """
    Vertices (i, j) splitting the poset as {a_1..a_i, b_1..b_j} + the rest.

    The split holds when C_{i,j+1} is red (or the row/column side is empty)
    and C_{i+1,j} is blue (likewise); cells C_{0,j} and C_{i,0} count as
    red and blue respectively, which covers the corner-cell conditions.
    """
    m, n = grid.m, grid.n
    splits = []
    for i in range(m + 1):
        for j in range(n + 1):
            if not 0 < i + j < m + n:
                continue
            lower_ok = i == 0 or j == n or grid.is_red(i, j + 1)
            upper_ok = j == 0 or i == m or grid.is_blue(i + 1, j)
            if lower_ok and upper_ok:
                splits.append((i, j))
    return splits


def split_grid(grid: GridDiagram, vertex: tuple[int, int]) -> tuple[GridDiagram, GridDiagram]:
    """Grids of the two summands at a split vertex."""
    i, j = vertex
    m, n = grid.m, grid.n
    lower = GridDiagram(
        m=i,
        n=j,
        red_row_lengths=tuple(max(0, r - (n - j)) for r in grid.red_row_lengths[:i]),
        blue_col_heights=tuple(max(0, h - (m - i)) for h in grid.blue_col_heights[:j]),
    )
    upper = GridDiagram(
        m=m - i,
        n=n - j,
        red_row_lengths=tuple(min(r, n - j) for r in grid.red_row_lengths[i:]),
        blue_col_heights=tuple(min(h, m - i) for h in grid.blue_col_heights[j:]),
    )
    return lower, upper


def direct_sum_blocks(grid: GridDiagram) -> list[GridDiagram]:
    """Recursive split into direct-sum indecomposable grids, bottom first."""
    splits = detect_direct_sum(grid)
    if not splits:
        return [grid]
    lower, upper = split_grid(grid, splits[0])
    return direct_sum_blocks(lower) + direct_sum_blocks(upper)


# -- log-concavity -------------------------------------------------------------


def log_concavity_violation(sequence: Sequence) -> Optional[tuple[int, str]]:
    """First index breaking "log-concave with surrounding zeros", or None."""
    support = [k for k, value in enumerate(sequence) if value != 0]
    if not support:
        return None
    first, last = support[0], support[-1]
    for k in range(first, last + 1):
        if sequence[k] <= 0:
            return k, "zero or negative entry inside the support"
    for k in range(first + 1, last):
        if sequence[k] * sequence[k] < sequence[k - 1] * sequence[k + 1]:
            return k, f"{sequence[k]}^2 < {sequence[k - 1]}*{sequence[k + 1]}"
    return None


def is_log_concave(sequence: Sequence) -> bool:
    return log_concavity_violation(sequence) is None


def check_log_concavity(tables: PathTables) -> LogConcavityReport:
    for name, matrix in (("t", tables.t), ("r", tables.r)):
        for line, row in enumerate(matrix):
            found = log_concavity_violation(row)
            if found:
                return LogConcavityReport(
                    passed=False, table=name, axis="row", line=line, index=found[0], reason=found[1]
                )
        for line in range(len(matrix[0])):
            found = log_concavity_violation([row[line] for row in matrix])
            if found:
                return LogConcavityReport(
                    passed=False, table=name, axis="column", line=line, index=found[0], reason=found[1]
                )
    return LogConcavityReport(passed=True)


def prefix_sums_logconcave(sequence: Sequence) -> list:
    """Prefix sums of a positive log-concave sequence, checked to be log-concave."""
    if any(value <= 0 for value in sequence) or not is_log_concave(sequence):
        raise ValueError("input not log-concave")
    sums = list(accumulate(sequence))
    found = log_concavity_violation(sums)
    if found:
        raise VerificationError(f"Prefix sums not log-concave at {found[0]}: {found[1]}")
    return sums


# -- rendering --------------------------------------------------------------------


def render_grid(grid: GridDiagram, region: Optional[SRegion] = None) -> str:
    """ASCII diagram, row 0 on top: '+' vertices, '*' on the S border, cells . R B."""
    region = region or s_region(grid)
    border = set(region.boundary_path)
    lines = []
    for i in range(grid.m + 1):
        lines.append(" ".join("*" if (i, j) in border else "+" for j in range(grid.n + 1)))
        if i < grid.m:
            lines.append((" " + " ".join(grid.color(i + 1, j) for j in range(1, grid.n + 1))).rstrip())
    return "\n".join(lines)
