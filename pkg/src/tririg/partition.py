"""Splitting a graph's edge set into edge-disjoint triangles.

Three interchangeable solvers are provided:

* :func:`exhaustive_partition` tries every k-subset of the graph's triangles.
* :func:`exact_cover_partition` runs a backtracking exact-cover search over the
  pre-enumerated triangles (edges are the universe, triangles the sets).
* :func:`end_to_end_search` never enumerates triangles. It grows the triangle
  indicator matrix one column at a time and accepts a column only if it passes
  the line-graph Laplacian test and the incidence test of
  :func:`check_k3_constraints`.

All of them return :class:`TrianglePartition` objects, so results can be
compared as sets through :attr:`TrianglePartition.key`.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidArgs,
    SolverTimeout,
    WrongSupport,
)
from .graph import Graph, incidence_matrix, line_graph_laplacian

DEFAULT_SUBSET_BUDGET = 10**9
DEFAULT_TIMEOUT = 100.0

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class Triangle:
    nodes: Triple
    edge_indices: Triple

    @classmethod
    def from_nodes(cls, g: Graph, nodes: Sequence[int]) -> "Triangle":
        a, b, c = sorted(nodes)
        return cls((a, b, c), (g.index_of(a, b), g.index_of(b, c), g.index_of(a, c)))

    @property
    def edge_mask(self) -> int:
        return (1 << self.edge_indices[0]) | (1 << self.edge_indices[1]) | (1 << self.edge_indices[2])


def indicator_matrix(g: Graph, triangles: Sequence[Triangle]) -> np.ndarray:
    """Binary |E| x N_T matrix whose j-th column marks the edges of triangle j."""
    T = np.zeros((g.m, len(triangles)), dtype=np.int8)
    for j, t in enumerate(triangles):
        T[list(t.edge_indices), j] = 1
    return T


@dataclass(frozen=True)
class TrianglePartition:
    """A set of edge-disjoint triangles covering every edge of ``graph``.

    ``x`` is the 0/1 selection vector over the parent triangle list when the
    partition came out of the pre-enumerated exact-cover search.
    """

    graph: Graph
    triangles: tuple[Triangle, ...]
    x: Optional[tuple[int, ...]] = None

    @property
    def key(self) -> tuple[Triple, ...]:
        return tuple(sorted(t.nodes for t in self.triangles))

    @property
    def matrix(self) -> np.ndarray:
        return indicator_matrix(self.graph, self.triangles)

    def node_triples(self) -> list[list[int]]:
        return [list(t) for t in self.key]

    @classmethod
    def from_triples(cls, g: Graph, triples) -> "TrianglePartition":
        return cls(g, tuple(Triangle.from_nodes(g, t) for t in triples))


def enumerate_triangles(g: Graph) -> list[Triangle]:
    """All K3 subgraphs of ``g``, sorted by node triple."""
    found = set()
    nbrs = g.neighbors
    for i in range(g.n):
        for v in nbrs[i]:
            if v < i:
                for w in nbrs[i] & nbrs[v]:
                    if w > v:
                        found.add(tuple(sorted((i, v, w))))
    return [Triangle.from_nodes(g, t) for t in sorted(found)]


def triangle_upper_bound(g: Graph, exact: bool = False):
    """Degree-based bound (1/3) * sum_i d_i (d_i - 1) / 2 on the triangle count.

    Returns the floor as an ``int``, or the exact :class:`~fractions.Fraction`
    when ``exact`` is set.
    """
    bound = Fraction(sum(d * (d - 1) for d in g.degrees), 6)
    return bound if exact else math.floor(bound)


def combination_count(m: int, k: int) -> int:
    if not (0 <= k <= m):
        raise InvalidArgs(f"need 0 <= k <= m, got m={m}, k={k}")
    return math.comb(m, k)


def _deadline(timeout: Optional[float]) -> float:
    return math.inf if timeout is None else time.perf_counter() + timeout


def _dedup(parts: list[TrianglePartition]) -> list[TrianglePartition]:
    seen = {}
    for p in parts:
        seen.setdefault(p.key, p)
    return [seen[k] for k in sorted(seen)]


def exhaustive_partition(
    g: Graph,
    find_all: bool = False,
    budget: int = DEFAULT_SUBSET_BUDGET,
    timeout: Optional[float] = None,
) -> list[TrianglePartition]:
    """Test every k-subset of triangles, k = |E|/3.

    Raises :class:`BudgetExceeded` up front when C(N_T, k) exceeds ``budget``.
    """
    if g.m % 3:
        return []
    tris = enumerate_triangles(g)
    k = g.m // 3
    if k > len(tris):
        return []
    total = combination_count(len(tris), k)
    if total > budget:
        raise BudgetExceeded(f"C({len(tris)}, {k}) = {total} subsets exceeds budget {budget}")
    deadline = _deadline(timeout)
    full = (1 << g.m) - 1
    masks = [t.edge_mask for t in tris]
    out = []
    for count, combo in enumerate(itertools.combinations(range(len(tris)), k)):
        if count & 0xFFFF == 0 and time.perf_counter() > deadline:
            raise SolverTimeout(f"exhaustive search exceeded {timeout} s")
        covered = 0
        for j in combo:
            covered |= masks[j]
        # k triangles of 3 edges reaching all 3k edges must be disjoint
        if covered == full:
            x = [0] * len(tris)
            for j in combo:
                x[j] = 1
            out.append(TrianglePartition(g, tuple(tris[j] for j in combo), tuple(x)))
            if not find_all:
                break
    return _dedup(out)


def _exact_cover(
    universe: Sequence[int],
    sets: Sequence[Sequence[int]],
    deadline: float,
) -> Iterator[list[int]]:
    """Algorithm X over dict-of-sets columns.

    Branches on the uncovered element contained in the fewest remaining sets,
    ties going to the lowest element.
    """
    X = {e: set() for e in universe}
    for r, members in enumerate(sets):
        for e in members:
            X[e].add(r)
    Y = {r: list(members) for r, members in enumerate(sets)}
    solution: list[int] = []
    calls = 0

    def select(r):
        cols = []
        for e in Y[r]:
            for other in X[e]:
                for f in Y[other]:
                    if f != e:
                        X[f].discard(other)
            cols.append(X.pop(e))
        return cols

    def deselect(r, cols):
        for e in reversed(Y[r]):
            X[e] = cols.pop()
            for other in X[e]:
                for f in Y[other]:
                    if f != e:
                        X[f].add(other)

    def search():
        nonlocal calls
        calls += 1
        if calls & 0x3FF == 0 and time.perf_counter() > deadline:
            raise SolverTimeout("exact cover search exceeded its time budget")
        if not X:
            yield list(solution)
            return
        e = min(X, key=lambda c: (len(X[c]), c))
        for r in sorted(X[e]):
            solution.append(r)
            cols = select(r)
            yield from search()
            deselect(r, cols)
            solution.pop()

    yield from search()


def exact_cover_partition(
    g: Graph, find_all: bool = False, timeout: Optional[float] = None
) -> list[TrianglePartition]:
    """Solve T x = 1 over binary x by exact-cover search on the triangle list.

    A graph without edges has exactly one (empty) partition.
    """
    tris = enumerate_triangles(g)
    out = []
    gen = _exact_cover(range(g.m), [t.edge_indices for t in tris], _deadline(timeout))
    for chosen in gen:
        x = [0] * len(tris)
        for j in chosen:
            x[j] = 1
        out.append(TrianglePartition(g, tuple(tris[j] for j in sorted(chosen)), tuple(x)))
        if not find_all:
            break
    return _dedup(out)


class K3Checker:
    """Evaluates the two per-column K3 constraints for one host graph.

    ``laplacian_ok``: c^T L c - d^T c <= -6 with L the line-graph Laplacian.
    ``incidence_ok``: |D| c <= 2 entrywise.
    """

    def __init__(self, g: Graph):
        self.graph = g
        lg = line_graph_laplacian(g)
        self.L = lg.L
        self.d = lg.d
        self.absD = np.abs(incidence_matrix(g)).astype(np.int64)

    def quadratic_form(self, support: Sequence[int]) -> int:
        s = list(support)
        return int(self.L[np.ix_(s, s)].sum() - self.d[s].sum())

    def flags(self, support: Sequence[int]) -> tuple[bool, bool]:
        s = list(support)
        lap_ok = self.quadratic_form(s) <= -6
        inc_ok = int(self.absD[:, s].sum(axis=1).max()) <= 2
        return lap_ok, inc_ok

    def check_column(self, col) -> tuple[bool, bool]:
        col = np.asarray(col)
        if col.shape != (self.graph.m,):
            raise DimensionMismatch(f"column has shape {col.shape}, expected ({self.graph.m},)")
        support = np.flatnonzero(col)
        if len(support) != 3 or not np.all(col[support] == 1):
            raise WrongSupport(f"column must have exactly three 1s, got support {support.tolist()}")
        return self.flags(support.tolist())


def check_k3_constraints(g: Graph, col) -> tuple[bool, bool]:
    """Return ``(laplacian_ok, incidence_ok)`` for a 3-edge indicator column."""
    return K3Checker(g).check_column(col)


def end_to_end_search(
    g: Graph, find_all: bool = False, timeout: Optional[float] = DEFAULT_TIMEOUT
) -> list[TrianglePartition]:
    """Depth-first feasibility search over the columns of T without triangle enumeration.

    Each level takes the lowest-index uncovered edge and tries every pair of
    still-uncovered edges as the rest of its column, keeping the column only
    when both K3 constraints hold. Candidate partners are drawn from the
    edge's line-graph neighbours (a nonzero off-diagonal entry of L), since
    the Laplacian constraint can only reach -6 when all three edges are
    mutually adjacent.
    """
    if g.m % 3:
        return []
    checker = K3Checker(g)
    line_nbrs = [np.flatnonzero(checker.L[e] < 0).tolist() for e in range(g.m)]
    deadline = _deadline(timeout)
    covered = [False] * g.m
    columns: list[tuple[int, int, int]] = []
    out: list[TrianglePartition] = []
    calls = 0

    def search() -> bool:
        nonlocal calls
        calls += 1
        if calls & 0xFF == 0 and time.perf_counter() > deadline:
            raise SolverTimeout(f"end-to-end search exceeded {timeout} s")
        try:
            e = covered.index(False)
        except ValueError:
            out.append(_partition_from_columns(g, columns))
            return not find_all
        cands = [f for f in line_nbrs[e] if not covered[f]]
        for a, b in itertools.combinations(cands, 2):
            lap_ok, inc_ok = checker.flags((e, a, b))
            if not (lap_ok and inc_ok):
                continue
            covered[e] = covered[a] = covered[b] = True
            columns.append((e, a, b))
            if search():
                return True
            columns.pop()
            covered[e] = covered[a] = covered[b] = False
        return False

    search()
    return _dedup(out)


def end_to_end_partition(
    g: Graph, timeout: Optional[float] = DEFAULT_TIMEOUT
) -> Optional[TrianglePartition]:
    found = end_to_end_search(g, find_all=False, timeout=timeout)
    return found[0] if found else None


def _partition_from_columns(g: Graph, columns) -> TrianglePartition:
    tris = []
    for col in columns:
        nodes = {v for e in col for v in g.edges[e]}
        tris.append(Triangle.from_nodes(g, nodes))
    return TrianglePartition(g, tuple(tris))


def validate_partition(g: Graph, T) -> bool:
    """True iff T^T 1 = 3, T 1 = 1 and every column passes both K3 constraints."""
    T = np.asarray(T)
    if T.ndim != 2 or T.shape[0] != g.m:
        raise DimensionMismatch(f"T has {T.shape[0] if T.ndim == 2 else '?'} rows, graph has {g.m} edges")
    if not np.isin(T, (0, 1)).all():
        return False
    if not (T.sum(axis=0) == 3).all() or not (T.sum(axis=1) == 1).all():
        return False
    checker = K3Checker(g)
    return all(all(checker.flags(np.flatnonzero(T[:, j]).tolist())) for j in range(T.shape[1]))
