"""Undirected simple graphs and the matrices derived from them.

Nodes are indexed ``0..n-1``. Edges are stored as ``(i, j)`` pairs with
``i < j`` in input order, and an edge's index is its position in that list.
Every matrix in the package keys on those indices.

Integer labels follow the upper-triangle convention: walk the strict upper
triangle of the adjacency matrix row by row, ``(0,1), (0,2), ..., (0,n-1),
(1,2), ...``, and let the k-th pair contribute bit ``2**k``. Under this
convention the octahedron built by the Henneberg sequence
K3 -> H1 -> H2 -> H2 gets label 26622.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    IndexOutOfRange,
    ParseError,
    SelfLoop,
    TooLarge,
    ValueTooLarge,
)

Edge = tuple[int, int]

MAX_CANONICAL_NODES = 10


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n < 0:
            raise IndexOutOfRange(f"node count must be nonnegative, got {self.n}")
        seen = set()
        normalized = []
        for pair in self.edges:
            i, j = (int(v) for v in pair)
            if i == j:
                raise SelfLoop(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise IndexOutOfRange(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            e = (i, j) if i < j else (j, i)
            if e in seen:
                raise DuplicateEdge(f"edge {e} appears twice")
            seen.add(e)
            normalized.append(e)
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: k for k, e in enumerate(self.edges)}

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edge_index

    def index_of(self, i: int, j: int) -> int:
        return self.edge_index[(min(i, j), max(i, j))]

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int8)
        for i, j in self.edges:
            A[i, j] = A[j, i] = 1
        return A

    def relabel(self, new_index: Sequence[int]) -> "Graph":
        """Return the graph with node ``v`` renamed to ``new_index[v]``.

        Edge order is preserved, so edge indices carry over unchanged.
        """
        if sorted(new_index) != list(range(self.n)):
            raise IndexOutOfRange("new_index must be a permutation of 0..n-1")
        return Graph(self.n, tuple((new_index[i], new_index[j]) for i, j in self.edges))


def from_edge_list(n: int, pairs: Iterable[Sequence[int]]) -> Graph:
    return Graph(n, tuple((int(p[0]), int(p[1])) for p in pairs))


class NCVerdict(NamedTuple):
    ok: bool
    even_degrees: bool
    edges_divisible_by_3: bool
    odd_nodes: tuple[int, ...]
    edge_count: int

    def __bool__(self):
        return self.ok

    def reasons(self) -> list[str]:
        out = []
        if not self.even_degrees:
            out.append(f"odd degree at nodes {list(self.odd_nodes)}")
        if not self.edges_divisible_by_3:
            out.append(f"edge count {self.edge_count} is not divisible by 3")
        return out


def necessary_conditions(g: Graph) -> NCVerdict:
    """Even degree everywhere and an edge count divisible by 3."""
    odd = tuple(v for v, d in enumerate(g.degrees) if d % 2)
    div3 = g.m % 3 == 0
    return NCVerdict(not odd and div3, not odd, div3, odd, g.m)


def incidence_matrix(g: Graph) -> np.ndarray:
    """n x |E| incidence matrix, +1 at the smaller endpoint and -1 at the other."""
    D = np.zeros((g.n, g.m), dtype=np.int8)
    for k, (i, j) in enumerate(g.edges):
        D[i, k] = 1
        D[j, k] = -1
    return D


class LineGraphLaplacian(NamedTuple):
    L: np.ndarray
    d: np.ndarray


def line_graph_laplacian(g: Graph) -> LineGraphLaplacian:
    absD = np.abs(incidence_matrix(g)).astype(np.int64)
    # |D|^T |D| has 2 on the diagonal and 1 where two edges share a node
    shared = absD.T @ absD
    A = (shared == 1).astype(np.int64)
    d = A.sum(axis=1)
    return LineGraphLaplacian(np.diag(d) - A, d)


def _pair_index(n: int, i: int, j: int) -> int:
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def graph_label(g: Graph) -> int:
    label = 0
    for i, j in g.edges:
        label |= 1 << _pair_index(g.n, i, j)
    return label


def decode_label(n: int, value: int) -> Graph:
    bits = n * (n - 1) // 2
    if value < 0 or value >= 1 << bits:
        raise ValueTooLarge(f"label {value} needs more than {bits} bits for n={n}")
    edges = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if value >> k & 1:
                edges.append((i, j))
            k += 1
    return Graph(n, tuple(edges))


def canonical_order(g: Graph) -> list[int]:
    """Node relabeling that minimises ``graph_label``.

    The most significant label bits belong to the pairs touching the highest
    node indices, so indices are filled from ``n-1`` downwards. Filling slot
    ``s`` fixes the bits between that node and all earlier slots; only the
    partial orderings whose new bits are lexicographically smallest can lead
    to the minimum, so everything else is dropped level by level.
    Returns ``new_index`` with ``new_index[v]`` the canonical index of ``v``.
    """
    n = g.n
    if n > MAX_CANONICAL_NODES:
        raise TooLarge(f"canonical labeling supports n <= {MAX_CANONICAL_NODES}, got {n}")
    adj = g.adjacency_masks
    prefixes: list[tuple[tuple[int, ...], int]] = [((), 0)]
    for _ in range(n):
        best = -1
        survivors: list[tuple[tuple[int, ...], int]] = []
        for order, used in prefixes:
            for v in range(n):
                if used >> v & 1:
                    continue
                a = adj[v]
                col = 0
                for u in order:
                    col = (col << 1) | (a >> u & 1)
                if best < 0 or col < best:
                    best = col
                    survivors = [(order + (v,), used | 1 << v)]
                elif col == best:
                    survivors.append((order + (v,), used | 1 << v))
        prefixes = survivors
    order = prefixes[0][0]
    new_index = [0] * n
    for slot, v in enumerate(order):
        new_index[v] = n - 1 - slot
    return new_index


def canonical_form(g: Graph) -> Graph:
    """Isomorphic copy of ``g`` whose label is the canonical label."""
    h = g.relabel(canonical_order(g))
    return Graph(h.n, tuple(sorted(h.edges)))


def canonical_label(g: Graph) -> int:
    """Minimum of ``graph_label`` over all node permutations."""
    return graph_label(g.relabel(canonical_order(g)))


def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` followed by ``m`` lines of 1-based ``i j`` pairs."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty edge list")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        pairs = [(int(a) - 1, int(b) - 1) for a, b, *_ in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed edge list: {exc}") from exc
    if len(pairs) != m:
        raise ParseError(f"header announces {m} edges but {len(pairs)} were given")
    return from_edge_list(n, pairs)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{i + 1} {j + 1}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


# a few named graphs used throughout

def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def octahedron() -> Graph:
    """Octahedron with antipodal pairs (0,3), (1,4), (2,5)."""
    skip = {(0, 3), (1, 4), (2, 5)}
    return Graph(6, tuple((i, j) for i in range(6) for j in range(i + 1, 6) if (i, j) not in skip))


def triangular_prism() -> Graph:
    return Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)))
