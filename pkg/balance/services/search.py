"""
Exhaustive search over small width-2 posets.

Every width-2 poset is generated from a pair of disjoint Young shapes in an
m x n grid, deduplicated by canonical key, and its balance constant computed
on the grid. Workers run through a multiprocessing pool; ``imap`` keeps the
input order, so the first grid seen for each key is the same for any number
of jobs.
"""

import logging
import multiprocessing
from fractions import Fraction
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Callable, Iterator, Optional

from balance.core.config import settings
from balance.core.errors import PosetError, VerificationError
from balance.core.exact import Ordering, quad_compare
from balance.core.grid import GridDiagram, delta_grid, detect_direct_sum, poset_from_grid
from balance.core.poset import Poset, canonical_form, format_poset, sum_blocks
from balance.models.schemas import SpectrumRecord, SpectrumReport
from balance.services.cases import LAMBDA

logger = logging.getLogger(__name__)

GridShapePair = GridDiagram

THIRD = Fraction(1, 3)


def _staircases(length: int, bound: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing sequences of ``length`` values in 0..bound."""
    for values in combinations_with_replacement(range(bound, -1, -1), length):
        yield values


def iter_grid_shapes(m: int, n: int) -> Iterator[GridShapePair]:
    """Every pair of disjoint justified Young shapes in the m x n grid."""
    for red in _staircases(m, n):
        for blue in _staircases(n, m):
            widths = [sum(1 for h in blue if h >= m - i + 1) for i in range(1, m + 1)]
            if all(w + r <= n for w, r in zip(widths, red)):
                yield GridDiagram(m=m, n=n, red_row_lengths=red, blue_col_heights=blue)


def _check_size(max_size: int, limit: Optional[int]) -> None:
    limit = settings.canonical_limit if limit is None else limit
    if max_size > limit:
        raise PosetError(f"canonical form limit exceeded: {max_size} elements > {limit}")


def iter_all_grids(max_size: int, min_size: int = 1) -> Iterator[GridShapePair]:
    for total in range(max(min_size, 1), max_size + 1):
        for n in range(total // 2 + 1):
            yield from iter_grid_shapes(total - n, n)


def enumerate_width2(max_size: int, min_size: int = 1, limit: Optional[int] = None) -> Iterator[Poset]:
    """
    Each poset of width at most 2 with min_size..max_size elements, once.

    Args:
        max_size: Largest element count
        min_size: Smallest element count
        limit: Canonical-form limit, settings.canonical_limit when omitted

    Yields:
        Posets in order of size, then grid shape
    """
    _check_size(max_size, limit)
    seen: set[bytes] = set()
    for grid in iter_all_grids(max_size, min_size):
        poset, _ = poset_from_grid(grid)
        key = canonical_form(poset, limit=max_size)
        if key not in seen:
            seen.add(key)
            yield poset


def is_aigner_family(poset: Poset) -> bool:
    """True when every direct-sum block is a single element or E (2-chain beside a point)."""
    for block in sum_blocks(poset):
        if len(block) == 1:
            continue
        if len(block) != 3:
            return False
        relations = sum(1 for x in block for y in block if poset.less(x, y))
        if relations != 1:
            return False
    return True


# -- workers -----------------------------------------------------------------------

_cached_keys: frozenset[str] = frozenset()


def _init_worker(cached_keys: frozenset[str]) -> None:
    global _cached_keys
    _cached_keys = cached_keys


def _analyze_grid(grid: GridShapePair) -> tuple[str, Optional[Fraction], bool, bool, bool]:
    """(key, delta or None when cached, is_aigner, is_direct_sum, is_chain)."""
    poset, _ = poset_from_grid(grid)
    key = canonical_form(poset, limit=poset.size).hex()
    delta = None if key in _cached_keys else delta_grid(grid).delta
    return key, delta, is_aigner_family(poset), bool(detect_direct_sum(grid)), poset.is_chain()


def _analyses(grids: list[GridShapePair], jobs: int, cached_keys: frozenset[str]) -> Iterator[tuple]:
    if jobs <= 1:
        _init_worker(cached_keys)
        yield from map(_analyze_grid, grids)
        return
    with multiprocessing.Pool(jobs, initializer=_init_worker, initargs=(cached_keys,)) as pool:
        yield from pool.imap(_analyze_grid, grids, chunksize=64)


# -- cache ---------------------------------------------------------------------------


def load_cache(path: Optional[Path]) -> dict[str, tuple[Fraction, bool]]:
    """Read ``<key>\\t<p/q>\\t<0|1>`` lines; unreadable lines are skipped."""
    if path is None or not path.exists():
        return {}
    entries = {}
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        parts = line.strip().split("\t")
        if len(parts) != 3:
            logger.warning(f"Skipping malformed cache line {number} in {path}")
            continue
        try:
            entries[parts[0]] = (Fraction(parts[1]), parts[2] == "1")
        except ValueError:
            logger.warning(f"Skipping malformed cache line {number} in {path}")
    logger.info(f"Loaded {len(entries)} cached records from {path}")
    return entries


def append_cache(path: Path, records: list[SpectrumRecord]) -> None:
    if not records:
        return
    with path.open("a") as handle:
        for record in records:
            handle.write(record.line() + "\n")
    logger.debug(f"Appended {len(records)} records to {path}")


# -- gap report ------------------------------------------------------------------------


def _counterexample(message: str, grid: GridShapePair) -> VerificationError:
    poset, _ = poset_from_grid(grid)
    return VerificationError(f"{message}\n{format_poset(poset)}")


def gap_report(
    max_size: int,
    jobs: int = 1,
    cache_path: Optional[Path] = None,
    limit: Optional[int] = None,
    progress: Optional[Callable[[int], None]] = None,
) -> SpectrumReport:
    """
    delta of every width-2 poset up to ``max_size`` elements, with the gap checked.

    Chains have delta 0, other members of the family generated from 1 and E by
    direct sums have delta exactly 1/3, and everything else reaches lambda.
    Any poset breaking this is raised as a VerificationError carrying the poset.
    """
    _check_size(max_size, limit)
    cache = load_cache(cache_path)
    grids = list(iter_all_grids(max_size))
    logger.info(f"Analyzing {len(grids)} grid shapes up to {max_size} elements with {jobs} job(s)")

    first_seen: dict[str, tuple[SpectrumRecord, GridShapePair]] = {}
    fresh: list[SpectrumRecord] = []
    served = 0
    for index, (grid, result) in enumerate(zip(grids, _analyses(grids, jobs, frozenset(cache)))):
        key, delta, aigner, direct_sum, is_chain = result
        if progress is not None:
            progress(index + 1)
        if key in first_seen:
            earlier = first_seen[key][0]
            if delta is not None and key not in cache and delta != earlier.delta:
                raise _counterexample(
                    f"delta depends on the decomposition: {earlier.delta} vs {delta}", grid
                )
            continue
        if delta is None:
            delta = cache[key][0]
            served += 1
        record = SpectrumRecord(
            key=key,
            delta=delta,
            is_aigner=aigner,
            is_direct_sum=direct_sum,
            size=grid.m + grid.n,
            poset=format_poset(poset_from_grid(grid)[0]),
        )
        first_seen[key] = (record, grid)
        if key not in cache:
            fresh.append(record)

        if is_chain and delta != 0:
            raise _counterexample(f"chain with delta {delta}", grid)
        if not is_chain and delta < THIRD:
            raise _counterexample(f"delta {delta} below 1/3", grid)
        if aigner and not is_chain and delta != THIRD:
            raise _counterexample(f"family member with delta {delta} instead of 1/3", grid)
        if not aigner and quad_compare(delta, LAMBDA) == Ordering.LESS:
            raise _counterexample(f"delta {delta} inside the gap below lambda", grid)

    if cache_path is not None:
        append_cache(cache_path, fresh)

    records = sorted((entry[0] for entry in first_seen.values()), key=lambda r: (r.size, r.key))
    candidates = [record for record in records if not record.is_aigner]
    minimum_key = None
    minimum_delta = None
    if candidates:
        record = min(candidates, key=lambda r: (r.delta, r.size, r.key))
        minimum_key, minimum_delta = record.key, record.delta
    logger.info(
        f"{len(records)} posets, {len(fresh)} newly computed, minimum non-family delta {minimum_delta}"
    )
    return SpectrumReport(
        max_size=max_size,
        records=records,
        min_non_aigner_delta=minimum_delta,
        min_non_aigner_key=minimum_key,
        distinct_deltas=sorted({record.delta for record in records}),
        cached=served,
    )
