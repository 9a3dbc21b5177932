"""Minimally rigid graphs from Henneberg steps, and their triangle partitions.

Starting from K3, every graph on ``n + 1`` nodes is produced from the graphs on
``n`` nodes by H1 (new node joined to 3 existing nodes) or H2 (new node joined
to 4 existing nodes, one edge among those 4 removed). Isomorphic copies are
merged through :func:`~tririg.graph.canonical_label`.

Nine-node graphs are only explored through a final H2 step from the 8-node
catalog: a final H1 step leaves a degree-3 node, which rules out a partition.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidNodes, MissingEdge
from .graph import (
    Graph,
    canonical_form,
    canonical_label,
    complete_graph,
    necessary_conditions,
)
from .partition import TrianglePartition, exact_cover_partition
from .rigidity import Framework, is_infinitesimally_rigid

log = logging.getLogger(__name__)

RIGIDITY_RETRIES = 5


@dataclass(frozen=True)
class HennebergStep:
    kind: str  # "H1" or "H2"
    attach_nodes: tuple[int, ...]
    deleted_edge: Optional[tuple[int, int]] = None

    def apply(self, g: Graph) -> Graph:
        if self.kind == "H1":
            return apply_h1(g, self.attach_nodes)
        if self.kind == "H2":
            return apply_h2(g, self.attach_nodes, self.deleted_edge)
        raise ValueError(f"unknown step kind {self.kind!r}")


def _check_attach(g: Graph, nodes: Sequence[int], count: int):
    if len(nodes) != count or len(set(nodes)) != count:
        raise InvalidNodes(f"need {count} distinct nodes, got {list(nodes)}")
    if any(not 0 <= v < g.n for v in nodes):
        raise InvalidNodes(f"nodes {list(nodes)} out of range for n={g.n}")


def apply_h1(g: Graph, nodes: Sequence[int]) -> Graph:
    _check_attach(g, nodes, 3)
    new = g.n
    return Graph(g.n + 1, g.edges + tuple((v, new) for v in sorted(nodes)))


def apply_h2(g: Graph, nodes: Sequence[int], deleted: Sequence[int]) -> Graph:
    _check_attach(g, nodes, 4)
    a, b = sorted(deleted)
    if a not in nodes or b not in nodes:
        raise InvalidNodes(f"deleted edge {(a, b)} must join two of {list(nodes)}")
    if not g.has_edge(a, b):
        raise MissingEdge(f"edge {(a, b)} is not in the graph")
    new = g.n
    kept = tuple(e for e in g.edges if e != (a, b))
    return Graph(g.n + 1, kept + tuple((v, new) for v in sorted(nodes)))


def h1_extensions(g: Graph) -> Iterable[Graph]:
    for nodes in itertools.combinations(range(g.n), 3):
        yield apply_h1(g, nodes)


def h2_extensions(g: Graph) -> Iterable[Graph]:
    for nodes in itertools.combinations(range(g.n), 4):
        for a, b in itertools.combinations(nodes, 2):
            if g.has_edge(a, b):
                yield apply_h2(g, nodes, (a, b))


def generic_rigid(g: Graph, seed: int, retries: int = RIGIDITY_RETRIES) -> bool:
    """Rank test at uniform random points in [0,1]^3, retried on unlucky draws."""
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        if is_infinitesimally_rigid(Framework(g, rng.random((g.n, 3)))):
            return True
    return False


def _dedup_canonical(candidates: Iterable[Graph]) -> dict[int, Graph]:
    found: dict[int, Graph] = {}
    for h in candidates:
        label = canonical_label(h)
        if label not in found:
            found[label] = canonical_form(h)
    return found


def _verified(found: dict[int, Graph]) -> list[Graph]:
    out = []
    for label in sorted(found):
        h = found[label]
        if h.m != 3 * h.n - 6 or not generic_rigid(h, seed=label):
            log.warning("dropping graph %d: not minimally rigid at a generic embedding", label)
            continue
        out.append(h)
    return out


def enumerate_minimally_rigid(n_max: int) -> dict[int, list[Graph]]:
    """Minimally rigid graphs for every node count 3..n_max, one per isomorphism class.

    Each list is sorted by canonical label and holds canonical forms.
    """
    if n_max > 8:
        raise ValueError("full enumeration is limited to n_max <= 8; use enumerate_9node_even")
    catalog = {3: [canonical_form(complete_graph(3))]}
    for n in range(4, n_max + 1):
        parents = catalog[n - 1]
        candidates = itertools.chain.from_iterable(
            itertools.chain(h1_extensions(g), h2_extensions(g)) for g in parents
        )
        catalog[n] = _verified(_dedup_canonical(candidates))
        log.info("n=%d: %d minimally rigid graphs", n, len(catalog[n]))
    return catalog


def enumerate_9node_even(catalog8: Sequence[Graph]) -> list[Graph]:
    """Distinct 9-node graphs from one H2 step on an 8-node graph that pass the necessary conditions.

    The condition test is isomorphism invariant, so filtering before the
    canonical dedup gives the same set as filtering after it.
    """
    candidates = (h for g in catalog8 for h in h2_extensions(g) if necessary_conditions(h))
    return _verified(_dedup_canonical(candidates))


@dataclass(frozen=True)
class CatalogEntry:
    label: int
    graph: Graph
    partitions: tuple[TrianglePartition, ...]

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass
class TableRow:
    nodes: int
    mr_graphs: Optional[int]
    satisfy_nc: int
    partitions: int

    def as_tuple(self):
        return (self.mr_graphs, self.satisfy_nc, self.partitions)


@dataclass
class Catalog:
    entries: list[CatalogEntry] = field(default_factory=list)
    table: dict[int, TableRow] = field(default_factory=dict)
    # graphs that pass the necessary conditions but admit no partition
    unpartitionable: dict[int, list[int]] = field(default_factory=dict)

    def by_nodes(self, n: int) -> list[CatalogEntry]:
        return [e for e in self.entries if e.n == n]


def _partition_row(n: int, graphs: Sequence[Graph], mr_count: Optional[int], catalog: Catalog):
    nc = [g for g in graphs if necessary_conditions(g)]
    total = 0
    for g in nc:
        parts = exact_cover_partition(g, find_all=True)
        label = canonical_label(g)
        if parts:
            catalog.entries.append(CatalogEntry(label, g, tuple(parts)))
            total += len(parts)
        else:
            catalog.unpartitionable.setdefault(n, []).append(label)
    catalog.table[n] = TableRow(n, mr_count, len(nc), total)


def build_catalog(n_max: int = 9, n_min: int = 6) -> Catalog:
    """Enumerate, filter by the necessary conditions, and partition every survivor."""
    catalog = Catalog()
    mr = enumerate_minimally_rigid(min(n_max, 8))
    for n in range(n_min, min(n_max, 8) + 1):
        _partition_row(n, mr[n], len(mr[n]), catalog)
    if n_max >= 9:
        nine = enumerate_9node_even(mr[8])
        _partition_row(9, nine, None, catalog)
    catalog.entries.sort(key=lambda e: (e.n, e.label))
    return catalog
