from __future__ import annotations

from pathlib import Path

import pytest

from balance.core.poset import Poset, canonical_form, e_poset, format_poset, singleton


def _extend_by_maximal(poset: Poset) -> list[Poset]:
    """Every poset obtained by adding one new maximal element above a down-set."""
    size = poset.size
    grown = []
    for mask in range(1 << size):
        if any(mask >> x & 1 and poset.down_mask(x) & ~mask for x in range(size)):
            continue
        matrix = [list(row) + [bool(mask >> x & 1)] for x, row in enumerate(poset.less_than)]
        matrix.append([False] * (size + 1))
        grown.append(Poset(size + 1, matrix))
    return grown


@pytest.fixture(scope="session")
def posets_by_size() -> dict[int, list[Poset]]:
    """One poset per isomorphism class, sizes 1..6, built without the grid engine."""
    classes = {1: [singleton()]}
    for size in range(2, 7):
        seen: dict[bytes, Poset] = {}
        for poset in classes[size - 1]:
            for candidate in _extend_by_maximal(poset):
                seen.setdefault(canonical_form(candidate, limit=size), candidate)
        classes[size] = list(seen.values())
    return classes


@pytest.fixture
def e() -> Poset:
    return e_poset()


@pytest.fixture
def poset_file(tmp_path: Path):
    """Write a poset (or raw text) to a file and return its path."""

    def write(content: Poset | str, name: str = "poset.txt") -> Path:
        path = tmp_path / name
        path.write_text(content if isinstance(content, str) else format_poset(content), encoding="utf-8")
        return path

    return write
