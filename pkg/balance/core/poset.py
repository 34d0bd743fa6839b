"""
Finite posets on 0..size-1.

Holds the relation model, the brute-force linear-extension oracle, the direct
sum and disjoint union constructors, width / two-chain decomposition by
bipartite matching, and canonical keys used to deduplicate posets.
"""

import itertools
import logging
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx
from networkx.algorithms import bipartite

from balance.core.config import settings
from balance.core.errors import PosetError
from balance.models.schemas import BalanceReport, TwoChainDecomposition

logger = logging.getLogger(__name__)


class Poset:
    """Immutable strict partial order stored as a transitively closed relation."""

    __slots__ = ("_size", "_less", "_down", "_up")

    def __init__(self, size: int, less_than: Sequence[Sequence[bool]]) -> None:
        if size < 0 or len(less_than) != size or any(len(row) != size for row in less_than):
            raise PosetError(f"Relation matrix must be {size}x{size}")
        self._size = size
        self._less = tuple(tuple(bool(v) for v in row) for row in less_than)
        self._up = tuple(
            sum(1 << y for y in range(size) if self._less[x][y]) for x in range(size)
        )
        self._down = tuple(
            sum(1 << x for x in range(size) if self._less[x][y]) for y in range(size)
        )
        self._validate()

    def _validate(self) -> None:
        for x in range(self._size):
            if self._less[x][x]:
                raise PosetError("irreflexivity violated")
            if self._up[x] & self._down[x]:
                raise PosetError("not a partial order")
            above = self._up[x]
            for y in _bits(above):
                if self._up[y] & ~above:
                    raise PosetError("relation is not transitively closed")

    @property
    def size(self) -> int:
        return self._size

    @property
    def less_than(self) -> tuple[tuple[bool, ...], ...]:
        return self._less

    def less(self, x: int, y: int) -> bool:
        return self._less[x][y]

    def comparable(self, x: int, y: int) -> bool:
        return x == y or self._less[x][y] or self._less[y][x]

    def down_mask(self, x: int) -> int:
        """Bitmask of the elements strictly below ``x``."""
        return self._down[x]

    def up_mask(self, x: int) -> int:
        return self._up[x]

    def relations(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self._size) for y in _bits(self._up[x])]

    def to_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self._size))
        graph.add_edges_from(self.relations())
        return graph

    def covers(self) -> list[tuple[int, int]]:
        """Cover relations (the Hasse diagram edges), sorted."""
        return sorted(nx.transitive_reduction(self.to_digraph()).edges())

    def is_chain(self) -> bool:
        return all(self.comparable(x, y) for x in range(self._size) for y in range(x + 1, self._size))

    def relabel(self, permutation: Sequence[int]) -> "Poset":
        """Poset with element ``x`` renamed to ``permutation[x]``."""
        if sorted(permutation) != list(range(self._size)):
            raise PosetError("Relabeling must be a permutation of the elements")
        matrix = [[False] * self._size for _ in range(self._size)]
        for x, y in self.relations():
            matrix[permutation[x]][permutation[y]] = True
        return Poset(self._size, matrix)

    def induced(self, elements: Sequence[int]) -> "Poset":
        """Subposet on ``elements``, renamed 0..k-1 in the given order."""
        return Poset(
            len(elements),
            [[self._less[x][y] for y in elements] for x in elements],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self._less == other._less

    def __hash__(self) -> int:
        return hash(self._less)

    def __repr__(self) -> str:
        return f"Poset(size={self._size}, covers={self.covers()})"


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# -- constructors ----------------------------------------------------------


def from_relations(size: int, pairs: Iterable[tuple[int, int]]) -> Poset:
    """Transitive closure of the strict relations ``u < v``."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(size))
    for u, v in pairs:
        if not (0 <= u < size and 0 <= v < size):
            raise PosetError(f"Element out of range in relation ({u}, {v}) for size {size}")
        if u == v:
            raise PosetError("irreflexivity violated")
        graph.add_edge(u, v)
    if not nx.is_directed_acyclic_graph(graph):
        raise PosetError("not a partial order")
    closure = nx.transitive_closure_dag(graph)
    matrix = [[False] * size for _ in range(size)]
    for u, v in closure.edges():
        matrix[u][v] = True
    return Poset(size, matrix)


def singleton() -> Poset:
    return Poset(1, [[False]])


def chain(length: int) -> Poset:
    return Poset(length, [[x < y for y in range(length)] for x in range(length)])


def antichain(size: int) -> Poset:
    return Poset(size, [[False] * size for _ in range(size)])


def e_poset() -> Poset:
    """Three elements with the single relation 0 < 1."""
    return from_relations(3, [(0, 1)])


def direct_sum(p: Poset, q: Poset) -> Poset:
    """Every element of ``p`` below every element of ``q``; q relabeled after p."""
    size = p.size + q.size
    matrix = [[False] * size for _ in range(size)]
    for x, y in p.relations():
        matrix[x][y] = True
    for x, y in q.relations():
        matrix[p.size + x][p.size + y] = True
    for x in range(p.size):
        for y in range(p.size, size):
            matrix[x][y] = True
    return Poset(size, matrix)


def disjoint_union(p: Poset, q: Poset) -> Poset:
    size = p.size + q.size
    matrix = [[False] * size for _ in range(size)]
    for x, y in p.relations():
        matrix[x][y] = True
    for x, y in q.relations():
        matrix[p.size + x][p.size + y] = True
    return Poset(size, matrix)


# -- linear-extension oracle -------------------------------------------------


def _check_oracle_limit(poset: Poset, limit: Optional[int]) -> None:
    limit = settings.oracle_limit if limit is None else limit
    if poset.size > limit:
        raise PosetError(f"oracle limit exceeded: {poset.size} elements > {limit}")


def _count_extensions(size: int, down: Sequence[int]) -> int:
    """Backtracking over placed prefixes, memoized on the placed set."""
    full = (1 << size) - 1

    @lru_cache(maxsize=None)
    def extend(placed: int) -> int:
        if placed == full:
            return 1
        total = 0
        for x in _bits(full & ~placed):
            if down[x] & ~placed == 0:
                total += extend(placed | (1 << x))
        return total

    return extend(0)


def _down_with(poset: Poset, x: int, y: int) -> list[int]:
    """Down masks after adding x < y (x, y incomparable) and closing."""
    below_x = poset.down_mask(x) | (1 << x)
    lifted = poset.up_mask(y) | (1 << y)
    return [
        poset.down_mask(z) | below_x if lifted >> z & 1 else poset.down_mask(z)
        for z in range(poset.size)
    ]


def count_extensions_oracle(poset: Poset, limit: Optional[int] = None) -> int:
    _check_oracle_limit(poset, limit)
    return _count_extensions(poset.size, [poset.down_mask(x) for x in range(poset.size)])


def pair_probability_oracle(poset: Poset, x: int, y: int, limit: Optional[int] = None) -> Fraction:
    """Probability that ``x`` precedes ``y`` in a uniform linear extension."""
    _check_oracle_limit(poset, limit)
    if x == y or poset.less(y, x):
        return Fraction(0)
    if poset.less(x, y):
        return Fraction(1)
    total = count_extensions_oracle(poset, limit)
    return Fraction(_count_extensions(poset.size, _down_with(poset, x, y)), total)


def delta_oracle(poset: Poset, limit: Optional[int] = None) -> BalanceReport:
    _check_oracle_limit(poset, limit)
    total = count_extensions_oracle(poset, limit)
    best, witness = Fraction(0), None
    for x in range(poset.size):
        for y in range(x + 1, poset.size):
            if poset.comparable(x, y):
                continue
            p = Fraction(_count_extensions(poset.size, _down_with(poset, x, y)), total)
            value = min(p, 1 - p)
            if value > best:
                best, witness = value, (x, y)
    logger.debug(f"Oracle delta {best} over {total} extensions")
    return BalanceReport(delta=best, witness=witness, extension_count=total, method="oracle")


# -- width and chain decompositions -----------------------------------------


def _chain_order(poset: Poset, elements: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(elements, key=lambda x: bin(poset.down_mask(x)).count("1")))


def width_and_decompose(poset: Poset) -> tuple[int, Optional[TwoChainDecomposition]]:
    """
    Width by Dilworth's theorem and, when it is at most 2, a two-chain cover.

    The minimum chain cover comes from a maximum matching between "out" and
    "in" copies of the elements along the comparability relation.
    """
    if poset.size == 0:
        return 0, None
    graph = nx.Graph()
    tops = [("out", x) for x in range(poset.size)]
    graph.add_nodes_from(tops, bipartite=0)
    graph.add_nodes_from((("in", y) for y in range(poset.size)), bipartite=1)
    graph.add_edges_from((("out", x), ("in", y)) for x, y in poset.relations())
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=tops)
    successor = {node[1]: mate[1] for node, mate in matching.items() if node[0] == "out"}
    width = poset.size - len(successor)
    if width > 2:
        return width, None

    matched = set(successor.values())
    chains = []
    for start in range(poset.size):
        if start in matched:
            continue
        current = [start]
        while current[-1] in successor:
            current.append(successor[current[-1]])
        chains.append(current)
    chains.sort(key=lambda c: (-len(c), c[0]))
    chain_b = tuple(chains[1]) if len(chains) > 1 else ()
    return width, TwoChainDecomposition(chain_a=tuple(chains[0]), chain_b=chain_b)


def is_chain_subset(poset: Poset, elements: Sequence[int]) -> bool:
    return all(poset.comparable(x, y) for x, y in itertools.combinations(elements, 2))


def iter_two_chain_decompositions(poset: Poset) -> Iterator[TwoChainDecomposition]:
    """Every ordered partition into two chains (the first nonempty)."""
    for mask in range(1, 1 << poset.size):
        part_a = [x for x in range(poset.size) if mask >> x & 1]
        part_b = [x for x in range(poset.size) if not mask >> x & 1]
        if is_chain_subset(poset, part_a) and is_chain_subset(poset, part_b):
            yield TwoChainDecomposition(
                chain_a=_chain_order(poset, part_a), chain_b=_chain_order(poset, part_b)
            )


def sum_blocks(poset: Poset) -> list[list[int]]:
    """
    Maximal direct-sum factorization, bottom block first.

    Incomparable elements must share a summand, so the blocks are the
    connected components of the incomparability graph.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(poset.size))
    graph.add_edges_from(
        (x, y)
        for x in range(poset.size)
        for y in range(x + 1, poset.size)
        if not poset.comparable(x, y)
    )
    blocks = [sorted(component) for component in nx.connected_components(graph)]
    blocks.sort(key=lambda block: min(bin(poset.down_mask(x)).count("1") for x in block))
    return blocks


# -- canonical keys ----------------------------------------------------------------


def _rank(signatures: list) -> list[int]:
    order = {sig: index for index, sig in enumerate(sorted(set(signatures)))}
    return [order[sig] for sig in signatures]


def _refined_colors(poset: Poset) -> list[int]:
    """Colour refinement seeded by (in-degree, out-degree, height)."""
    size = poset.size
    height = [0] * size
    for x in sorted(range(size), key=lambda z: bin(poset.down_mask(z)).count("1")):
        height[x] = 1 + max((height[y] for y in _bits(poset.down_mask(x))), default=0)
    colors = _rank(
        [
            (bin(poset.down_mask(x)).count("1"), bin(poset.up_mask(x)).count("1"), height[x])
            for x in range(size)
        ]
    )
    while True:
        refined = _rank(
            [
                (
                    colors[x],
                    tuple(sorted(colors[y] for y in _bits(poset.down_mask(x)))),
                    tuple(sorted(colors[y] for y in _bits(poset.up_mask(x)))),
                )
                for x in range(size)
            ]
        )
        if len(set(refined)) == len(set(colors)):
            return refined
        colors = refined


def _multiset_permutations(labels: list[int]) -> Iterator[tuple[int, ...]]:
    """Distinct orderings of ``labels`` in lexicographic order."""
    current = sorted(labels)
    while True:
        yield tuple(current)
        pivot = len(current) - 2
        while pivot >= 0 and current[pivot] >= current[pivot + 1]:
            pivot -= 1
        if pivot < 0:
            return
        swap = len(current) - 1
        while current[swap] <= current[pivot]:
            swap -= 1
        current[pivot], current[swap] = current[swap], current[pivot]
        current[pivot + 1:] = reversed(current[pivot + 1:])


def _class_orders(poset: Poset, members: list[int]) -> list[tuple[int, ...]]:
    # twins (same down-set and up-set) are swapped by an automorphism, so only
    # the pattern of twin groups matters
    groups: dict[tuple[int, int], list[int]] = {}
    for x in members:
        groups.setdefault((poset.down_mask(x), poset.up_mask(x)), []).append(x)
    group_list = list(groups.values())
    labels = [index for index, group in enumerate(group_list) for _ in group]
    orders = []
    for pattern in _multiset_permutations(labels):
        cursors = [0] * len(group_list)
        order = []
        for label in pattern:
            order.append(group_list[label][cursors[label]])
            cursors[label] += 1
        orders.append(tuple(order))
    return orders


def _encode(poset: Poset, order: Sequence[int]) -> int:
    code = 0
    for x in order:
        above = poset.up_mask(x)
        for y in order:
            code = (code << 1) | (above >> y & 1)
    return code


def canonical_form(poset: Poset, limit: Optional[int] = None) -> bytes:
    """
    Isomorphism-invariant key: the minimal relation-matrix encoding over all
    orderings compatible with the refined invariant classes.
    """
    limit = settings.canonical_limit if limit is None else limit
    if poset.size > limit:
        raise PosetError(f"canonical form limit exceeded: {poset.size} elements > {limit}")
    colors = _refined_colors(poset)
    classes = [
        [x for x in range(poset.size) if colors[x] == color] for color in sorted(set(colors))
    ]
    best = None
    for choice in itertools.product(*(_class_orders(poset, members) for members in classes)):
        code = _encode(poset, [x for part in choice for x in part])
        if best is None or code < best:
            best = code
    width = (poset.size * poset.size + 7) // 8
    return bytes([poset.size]) + (best or 0).to_bytes(width, "big")


# -- text format ---------------------------------------------------------------------

_HEADER = re.compile(r"^poset\s+(\d+)$")
_RELATION = re.compile(r"^rel\s+(-?\d+)\s+(-?\d+)$")


def parse_poset(text: str) -> Poset:
    """Read ``poset <size>`` followed by ``rel <u> <v>`` lines; closure applied."""
    size: Optional[int] = None
    pairs: list[tuple[int, int]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if size is None:
            header = _HEADER.match(line)
            if not header:
                raise PosetError(f"line {number}: expected 'poset <size>', got {line!r}")
            size = int(header.group(1))
            continue
        relation = _RELATION.match(line)
        if not relation:
            raise PosetError(f"line {number}: expected 'rel <u> <v>', got {line!r}")
        pairs.append((int(relation.group(1)), int(relation.group(2))))
    if size is None:
        raise PosetError("empty poset file")
    return from_relations(size, pairs)


def format_poset(poset: Poset) -> str:
    lines = [f"poset {poset.size}"]
    lines.extend(f"rel {u} {v}" for u, v in poset.covers())
    return "\n".join(lines) + "\n"
