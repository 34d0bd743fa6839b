from __future__ import annotations

from fractions import Fraction
from math import comb

import pytest
from pydantic import ValidationError

from balance.core.errors import PosetError
from balance.core.grid import (
    GridDiagram,
    build_grid,
    check_log_concavity,
    count_above,
    count_below,
    delta_grid,
    detect_direct_sum,
    direct_sum_blocks,
    is_log_concave,
    log_concavity_violation,
    path_tables,
    poset_from_grid,
    prefix_sums_logconcave,
    probability_matrix,
    render_grid,
    s_region,
    split_grid,
)
from balance.core.poset import (
    Poset,
    antichain,
    canonical_form,
    chain,
    count_extensions_oracle,
    delta_oracle,
    direct_sum,
    iter_two_chain_decompositions,
    pair_probability_oracle,
    singleton,
    width_and_decompose,
)
from balance.models.schemas import TwoChainDecomposition
from balance.services.search import enumerate_width2


def _grid(m: int, n: int, *, red: tuple[int, ...] | None = None, blue: tuple[int, ...] | None = None) -> GridDiagram:
    return GridDiagram(
        m=m,
        n=n,
        red_row_lengths=red if red is not None else (0,) * m,
        blue_col_heights=blue if blue is not None else (0,) * n,
    )


def _e_grid(e: Poset) -> GridDiagram:
    _, decomposition = width_and_decompose(e)
    return build_grid(e, decomposition)


def test_e_grid_is_uncoloured(e: Poset) -> None:
    grid = _e_grid(e)
    assert (grid.m, grid.n) == (2, 1)
    assert [grid.color(i, 1) for i in (1, 2)] == [".", "."]


def test_two_chain_grids() -> None:
    split = build_grid(chain(2), TwoChainDecomposition(chain_a=(0,), chain_b=(1,)))
    assert split.is_red(1, 1)
    assert probability_matrix(split) == [[Fraction(1)]]

    tall = build_grid(chain(2), TwoChainDecomposition(chain_a=(0, 1)))
    assert (tall.m, tall.n) == (2, 0)
    assert path_tables(tall).extension_count == 1
    assert delta_grid(tall).delta == 0


def test_inconsistent_decomposition_is_rejected(e: Poset) -> None:
    with pytest.raises(PosetError, match="not increasing chains"):
        build_grid(e, TwoChainDecomposition(chain_a=(0, 2), chain_b=(1,)))


def test_overlapping_regions_are_rejected() -> None:
    with pytest.raises(ValidationError):
        _grid(1, 1, red=(1,), blue=(1,))
    with pytest.raises(ValidationError):
        _grid(2, 1, red=(0, 1))


def test_path_tables(e: Poset) -> None:
    tables = path_tables(_e_grid(e))
    assert tables.t[2][1] == 3
    assert tables.r[0][0] == 3
    assert count_below(tables, 1, 1) == 2
    assert count_above(tables, 1, 1) == 1
    assert count_below(tables, 2, 1) == 1
    with pytest.raises(IndexError):
        count_below(tables, 3, 1)


@pytest.mark.parametrize(("m", "n"), [(1, 1), (2, 3), (3, 4), (5, 2)])
def test_free_grid_counts_binomials(m: int, n: int) -> None:
    tables = path_tables(_grid(m, n))
    assert tables.extension_count == comb(m + n, m)
    assert check_log_concavity(tables).passed


def test_below_and_above_partition_the_paths() -> None:
    grid = _grid(3, 3, red=(2, 1, 0), blue=(1, 0, 0))
    tables = path_tables(grid)
    for i in range(1, 4):
        for j in range(1, 4):
            assert count_below(tables, i, j) + count_above(tables, i, j) == tables.extension_count
            if grid.is_red(i, j):
                assert count_above(tables, i, j) == 0
            if grid.is_blue(i, j):
                assert count_below(tables, i, j) == 0


def test_probability_matrix(e: Poset) -> None:
    assert probability_matrix(_e_grid(e)) == [[Fraction(2, 3)], [Fraction(1, 3)]]
    assert probability_matrix(_grid(1, 4)) == [[Fraction(j, 5) for j in range(1, 5)]]


def test_delta_of_e(e: Poset) -> None:
    report = delta_grid(_e_grid(e))
    assert report.delta == Fraction(1, 3)
    assert report.witness_cell == (2, 1)
    assert report.witness == (1, 2)
    assert report.extension_count == 3
    assert report.method == "grid"


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_single_row_grids(k: int) -> None:
    assert delta_grid(_grid(1, 2 * k)).delta == Fraction(k, 2 * k + 1)
    assert delta_grid(_grid(1, 2 * k + 1)).delta == Fraction(1, 2)


def test_grid_matches_oracle_on_every_small_poset(posets_by_size) -> None:
    checked = 0
    for size in range(1, 7):
        for poset in posets_by_size[size]:
            width, decomposition = width_and_decompose(poset)
            if decomposition is None:
                continue
            grid = build_grid(poset, decomposition)
            report = delta_grid(grid)
            assert report.delta == delta_oracle(poset).delta
            assert report.extension_count == count_extensions_oracle(poset)
            if report.witness is not None:
                x, y = report.witness
                p = pair_probability_oracle(poset, x, y)
                assert min(p, 1 - p) == report.delta
            checked += 1
    assert checked > 30


def _assert_matrix_matches_oracle(poset: Poset, grid: GridDiagram) -> None:
    for i, row in enumerate(probability_matrix(grid), 1):
        for j, value in enumerate(row, 1):
            assert value == pair_probability_oracle(poset, *grid.element_pair(i, j))


def _assert_decomposition_independent(poset: Poset) -> None:
    deltas = {delta_grid(build_grid(poset, d)).delta for d in iter_two_chain_decompositions(poset)}
    assert deltas == {delta_oracle(poset).delta}


def test_delta_is_independent_of_the_decomposition(e: Poset, posets_by_size) -> None:
    poset = direct_sum(e, singleton())
    deltas = {delta_grid(build_grid(poset, d)).delta for d in iter_two_chain_decompositions(poset)}
    assert deltas == {Fraction(1, 3)}
    for size in range(1, 7):
        for poset in posets_by_size[size]:
            if width_and_decompose(poset)[1] is not None:
                _assert_decomposition_independent(poset)


def test_poset_from_grid_round_trip() -> None:
    grid = _grid(3, 2, red=(2, 1, 0), blue=(1, 0))
    poset, decomposition = poset_from_grid(grid)
    rebuilt = build_grid(poset, decomposition)
    assert rebuilt.red_row_lengths == grid.red_row_lengths
    assert rebuilt.blue_col_heights == grid.blue_col_heights


def test_s_region(e: Poset) -> None:
    region = s_region(_e_grid(e))
    assert region.s_col_heights == [1]
    assert region.boundary_path == [(0, 0), (1, 0), (1, 1), (2, 1)]

    red = build_grid(chain(2), TwoChainDecomposition(chain_a=(0,), chain_b=(1,)))
    assert s_region(red).s_col_heights == [0]
    assert s_region(_grid(1, 1)).s_col_heights == [1]


def test_s_region_contains_blue_and_avoids_red() -> None:
    grid = _grid(3, 3, red=(2, 1, 0), blue=(1, 0, 0))
    region = s_region(grid)
    for j in range(1, 4):
        height = region.s_col_heights[j - 1]
        for i in range(1, 4):
            inside = i > 3 - height
            if grid.is_blue(i, j):
                assert inside
            if grid.is_red(i, j):
                assert not inside


def test_direct_sum_detection(e: Poset) -> None:
    stacked = build_grid(chain(2), TwoChainDecomposition(chain_a=(0,), chain_b=(1,)))
    assert detect_direct_sum(stacked) == [(1, 0)]
    assert detect_direct_sum(_e_grid(e)) == []

    grid = _grid(2, 2, red=(1, 0), blue=(1, 0))
    assert detect_direct_sum(grid) == [(1, 1)]
    poset, _ = poset_from_grid(grid)
    assert canonical_form(poset) == canonical_form(direct_sum(antichain(2), antichain(2)))

    lower, upper = split_grid(grid, (1, 1))
    assert (lower.m, lower.n, upper.m, upper.n) == (1, 1, 1, 1)
    assert lower.color(1, 1) == "." and upper.color(1, 1) == "."
    assert len(direct_sum_blocks(grid)) == 2


@pytest.mark.parametrize(
    ("sequence", "expected"),
    [
        ((5, 14, 23, 32), True),
        ((1, 0, 1), False),
        ((0, 0, 1, 2, 1, 0), True),
        ((1, 1, 2), False),
        ((), True),
    ],
)
def test_log_concavity(sequence: tuple, expected: bool) -> None:
    assert is_log_concave(sequence) is expected


def test_log_concavity_reports_the_position() -> None:
    assert log_concavity_violation((1, 0, 1)) == (1, "zero or negative entry inside the support")
    assert log_concavity_violation((1, 1, 2))[0] == 1


def test_prefix_sums() -> None:
    assert prefix_sums_logconcave((1, 1, 1)) == [1, 2, 3]
    assert prefix_sums_logconcave((1, 2, 1)) == [1, 3, 4]
    assert prefix_sums_logconcave((1, 3, 9, 27)) == [1, 4, 13, 40]
    with pytest.raises(ValueError, match="input not log-concave"):
        prefix_sums_logconcave((1, 0, 1))
    with pytest.raises(ValueError, match="input not log-concave"):
        prefix_sums_logconcave((1, 1, 2))


def test_render_grid(e: Poset) -> None:
    assert render_grid(_e_grid(e)) == "* +\n .\n* *\n .\n+ *"
    rendered = render_grid(_grid(2, 2, red=(1, 0), blue=(1, 0)))
    assert "R" in rendered and "B" in rendered


def test_border_path_runs_corner_to_corner() -> None:
    for red, blue in [((2, 1, 0), (1, 0, 0)), ((0, 0, 0), (0, 0, 0)), ((3, 3, 0), (1, 1, 0))]:
        path = s_region(_grid(3, 3, red=red, blue=blue)).boundary_path
        assert path[0] == (0, 0) and path[-1] == (3, 3)
        assert len(path) == 7


@pytest.mark.slow
def test_grid_matches_oracle_at_eight_elements() -> None:
    for poset in enumerate_width2(8, min_size=7):
        _, decomposition = width_and_decompose(poset)
        grid = build_grid(poset, decomposition)
        assert delta_grid(grid).delta == delta_oracle(poset).delta
        _assert_matrix_matches_oracle(poset, grid)
        _assert_decomposition_independent(poset)


def _width_two_grids(posets_by_size, sizes=range(2, 7)):
    for size in sizes:
        for poset in posets_by_size[size]:
            _, decomposition = width_and_decompose(poset)
            if decomposition is not None:
                yield poset, build_grid(poset, decomposition)


def test_anti_diagonals_carry_every_path(posets_by_size) -> None:
    for _, grid in _width_two_grids(posets_by_size):
        tables = path_tables(grid)
        for k in range(grid.m + grid.n + 1):
            crossing = sum(
                tables.paths_through(i, k - i) for i in range(grid.m + 1) if 0 <= k - i <= grid.n
            )
            assert crossing == tables.extension_count


def test_probabilities_are_monotone(posets_by_size) -> None:
    for poset, grid in _width_two_grids(posets_by_size):
        matrix = probability_matrix(grid)
        for i in range(grid.m):
            for j in range(grid.n):
                if i + 1 < grid.m:
                    assert matrix[i + 1][j] <= matrix[i][j]
                if j + 1 < grid.n:
                    assert matrix[i][j] <= matrix[i][j + 1]
                x, y = grid.element_pair(i + 1, j + 1)
                assert matrix[i][j] == pair_probability_oracle(poset, x, y)


def test_reported_splits_are_direct_sums(posets_by_size) -> None:
    for _, grid in _width_two_grids(posets_by_size):
        poset, _ = poset_from_grid(grid)
        for i, j in detect_direct_sum(grid):
            lower = set(range(i)) | set(range(grid.m, grid.m + j))
            upper = set(range(poset.size)) - lower
            assert all(poset.less(x, y) for x in lower for y in upper)
