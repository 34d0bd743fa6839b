from __future__ import annotations

import random
from fractions import Fraction

import pytest

from balance.core.errors import PosetError
from balance.core.poset import (
    Poset,
    antichain,
    canonical_form,
    chain,
    count_extensions_oracle,
    delta_oracle,
    direct_sum,
    disjoint_union,
    e_poset,
    format_poset,
    from_relations,
    iter_two_chain_decompositions,
    pair_probability_oracle,
    parse_poset,
    singleton,
    sum_blocks,
    width_and_decompose,
)


def test_from_relations_builds_e(e: Poset) -> None:
    poset = from_relations(3, [(0, 1)])
    assert poset == e
    assert poset.relations() == [(0, 1)]
    assert not poset.comparable(0, 2)


def test_transitive_closure() -> None:
    poset = from_relations(3, [(0, 1), (1, 2)])
    assert poset.less(0, 2)
    assert poset == chain(3)
    assert poset.covers() == [(0, 1), (1, 2)]


@pytest.mark.parametrize(
    ("size", "pairs", "message"),
    [
        (2, [(0, 1), (1, 0)], "not a partial order"),
        (3, [(0, 1), (1, 2), (2, 0)], "not a partial order"),
        (2, [(1, 1)], "irreflexivity violated"),
        (2, [(0, 2)], "out of range"),
    ],
)
def test_bad_relations(size: int, pairs: list, message: str) -> None:
    with pytest.raises(PosetError, match=message):
        from_relations(size, pairs)


def test_matrix_must_be_closed() -> None:
    matrix = [[False, True, False], [False, False, True], [False, False, False]]
    with pytest.raises(PosetError, match="transitively closed"):
        Poset(3, matrix)


def test_relabel_and_induced(e: Poset) -> None:
    moved = e.relabel([2, 0, 1])
    assert moved.relations() == [(2, 0)]
    assert e.induced([0, 1]) == chain(2)
    with pytest.raises(PosetError):
        e.relabel([0, 0, 1])


@pytest.mark.parametrize(
    ("poset", "count"),
    [(e_poset(), 3), (chain(3), 1), (antichain(3), 6), (antichain(0), 1), (direct_sum(e_poset(), e_poset()), 9)],
)
def test_extension_counts(poset: Poset, count: int) -> None:
    assert count_extensions_oracle(poset) == count


def test_oracle_limit() -> None:
    with pytest.raises(PosetError, match="oracle limit exceeded"):
        count_extensions_oracle(chain(11), limit=10)
    assert count_extensions_oracle(chain(11), limit=11) == 1


def test_pair_probabilities(e: Poset) -> None:
    assert pair_probability_oracle(e, 2, 0) == Fraction(1, 3)
    assert pair_probability_oracle(e, 0, 2) == Fraction(2, 3)
    assert pair_probability_oracle(e, 1, 0) == 0
    assert pair_probability_oracle(chain(2), 0, 1) == 1
    assert pair_probability_oracle(antichain(2), 0, 1) == Fraction(1, 2)


def test_oracle_delta(e: Poset) -> None:
    report = delta_oracle(e)
    assert report.delta == Fraction(1, 3)
    assert report.extension_count == 3
    assert report.method == "oracle"
    assert report.witness in {(0, 2), (1, 2)}

    assert delta_oracle(chain(5)).delta == 0
    assert delta_oracle(chain(5)).witness is None
    assert delta_oracle(direct_sum(e, e)).delta == Fraction(1, 3)
    assert delta_oracle(antichain(3)).delta == Fraction(1, 2)


def test_sum_and_union_constructors(e: Poset) -> None:
    one = singleton()
    assert direct_sum(one, one) == chain(2)
    assert disjoint_union(one, one) == antichain(2)
    assert disjoint_union(direct_sum(one, one), one) == e


def test_width_and_decomposition(e: Poset) -> None:
    width, decomposition = width_and_decompose(e)
    assert width == 2
    assert decomposition.chain_a == (0, 1)
    assert decomposition.chain_b == (2,)

    assert width_and_decompose(antichain(3)) == (3, None)

    width, decomposition = width_and_decompose(chain(4))
    assert width == 1
    assert decomposition.chain_a == (0, 1, 2, 3)
    assert decomposition.chain_b == ()


def test_two_chain_decompositions(e: Poset) -> None:
    found = {(d.chain_a, d.chain_b) for d in iter_two_chain_decompositions(e)}
    assert found == {((0, 1), (2,)), ((2,), (0, 1))}


def test_sum_blocks(e: Poset) -> None:
    assert sum_blocks(direct_sum(e, e)) == [[0, 1, 2], [3, 4, 5]]
    assert sum_blocks(chain(3)) == [[0], [1], [2]]
    assert sum_blocks(e) == [[0, 1, 2]]


def test_canonical_form_invariance(e: Poset) -> None:
    key = canonical_form(e)
    for permutation in ([0, 1, 2], [2, 0, 1], [1, 2, 0], [0, 2, 1]):
        assert canonical_form(e.relabel(permutation)) == key
    assert canonical_form(chain(3)) != canonical_form(antichain(3))
    one = singleton()
    assert canonical_form(direct_sum(one, e)) != canonical_form(direct_sum(e, one))


def test_canonical_form_limit() -> None:
    with pytest.raises(PosetError, match="canonical form limit exceeded"):
        canonical_form(chain(5), limit=4)


def test_canonical_form_separates_every_class(posets_by_size) -> None:
    counts = [len(posets_by_size[size]) for size in range(1, 7)]
    assert counts == [1, 2, 5, 16, 63, 318]


def test_parse_and_format(e: Poset) -> None:
    text = "# the poset E\nposet 3\n\nrel 0 1   # a chain of two\n"
    assert parse_poset(text) == e
    assert format_poset(chain(3)) == "poset 3\nrel 0 1\nrel 1 2\n"
    assert parse_poset(format_poset(direct_sum(e, e))) == direct_sum(e, e)


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("", "empty poset file"),
        ("poset x\n", "expected 'poset <size>'"),
        ("poset 2\nrel 0\n", "expected 'rel <u> <v>'"),
        ("poset 2\nrel 0 1\nrel 1 0\n", "not a partial order"),
        ("poset 2\nrel 0 5\n", "out of range"),
    ],
)
def test_parse_errors(text: str, message: str) -> None:
    with pytest.raises(PosetError, match=message):
        parse_poset(text)


def test_oracle_pair_probabilities_complement(posets_by_size) -> None:
    for poset in (p for size in range(1, 6) for p in posets_by_size[size]):
        for x in range(poset.size):
            for y in range(poset.size):
                if x != y:
                    assert pair_probability_oracle(poset, x, y) + pair_probability_oracle(poset, y, x) == 1


def test_sum_and_union_laws_on_random_pairs(posets_by_size) -> None:
    rng = random.Random(5)
    corpus = [poset for size in range(1, 7) for poset in posets_by_size[size]]
    for _ in range(200):
        p = rng.choice(corpus)
        q = rng.choice([poset for poset in corpus if poset.size + p.size <= 8])
        joined = max(delta_oracle(p).delta, delta_oracle(q).delta)
        assert delta_oracle(direct_sum(p, q)).delta == joined
        assert delta_oracle(disjoint_union(p, q)).delta >= joined


def test_decompositions_partition_into_chains(posets_by_size) -> None:
    for poset in posets_by_size[5]:
        width, decomposition = width_and_decompose(poset)
        if decomposition is None:
            assert width > 2
            continue
        elements = decomposition.chain_a + decomposition.chain_b
        assert sorted(elements) == list(range(poset.size))
        for strand in (decomposition.chain_a, decomposition.chain_b):
            assert all(poset.less(x, y) for x, y in zip(strand, strand[1:]))
