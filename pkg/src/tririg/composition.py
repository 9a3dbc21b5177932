"""Gluing two partitioned rigid frameworks along a triangle.

The labelled triangle of the first framework loses its three edges; its nodes
are merged with the anchor triangle of the second framework, which is moved
into place by a rigid transform. The first graph's partition minus the
labelled triangle, together with the second graph's partition, partitions the
result, and rigidity of both inputs carries over to the glued framework.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import Degenerate, NotCongruent, NotRigidInput, TriangleNotInPartition, UnreachableSize
from .graph import Graph, octahedron
from .partition import TrianglePartition, exact_cover_partition, validate_partition
from .rigidity import Framework, is_infinitesimally_rigid

CONGRUENCE_TOL = 1e-8


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __call__(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class PartitionedFramework:
    framework: Framework
    partition: TrianglePartition

    @property
    def graph(self) -> Graph:
        return self.framework.graph

    @property
    def positions(self) -> np.ndarray:
        return self.framework.positions


def _pairwise(points: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(points[a] - points[b]) for a, b in ((0, 1), (1, 2), (0, 2))])


def _check_triangle(points: np.ndarray, tol: float):
    area2 = np.linalg.norm(np.cross(points[1] - points[0], points[2] - points[0]))
    scale = max(_pairwise(points).max(), 1.0)
    if area2 <= tol * scale:
        raise Degenerate("triangle points are collinear")


def find_transform(p, q, tol: float = CONGRUENCE_TOL, allow_reflection: bool = False) -> RigidTransform:
    """Least-squares rigid motion M with M(q_k) = p_k for three congruent points."""
    p = np.asarray(p, dtype=float).reshape(3, 3)
    q = np.asarray(q, dtype=float).reshape(3, 3)
    _check_triangle(p, tol)
    _check_triangle(q, tol)
    if np.abs(_pairwise(p) - _pairwise(q)).max() > tol:
        raise NotCongruent(f"side lengths differ: {_pairwise(p)} vs {_pairwise(q)}")
    pc, qc = p.mean(axis=0), q.mean(axis=0)
    H = (q - qc).T @ (p - pc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0 or allow_reflection:
        d = 1.0
    S = np.diag([1.0, 1.0, d])
    Rot = Vt.T @ S @ U.T
    M = RigidTransform(Rot, pc - Rot @ qc)
    resid = np.linalg.norm(M(q) - p, axis=1).max()
    if resid > tol:
        raise NotCongruent(f"alignment residual {resid:.3e} exceeds {tol}")
    return M


def match_triangle(f: Framework, tri: Sequence[int], target, away_from=None) -> Framework:
    """Re-embed ``f`` by an affine map that sends the nodes ``tri`` exactly onto ``target``.

    Nonsingular affine maps keep infinitesimal rigidity, so this makes any two
    rigid frameworks gluable. The normal direction is scaled with the triangle
    size; its sign is picked so the remaining nodes end up on the side of the
    target plane facing away from ``away_from`` when that point is given.
    """
    q = f.positions[list(tri)]
    p = np.asarray(target, dtype=float).reshape(3, 3)
    _check_triangle(p, 1e-12)
    _check_triangle(q, 1e-12)

    def frame(pts, sign=1.0):
        u, v = pts[1] - pts[0], pts[2] - pts[0]
        nrm = np.cross(u, v)
        size = np.sqrt(np.linalg.norm(nrm))
        return np.column_stack([u, v, sign * size * nrm / np.linalg.norm(nrm)])

    Q = frame(q)
    best = None
    for sign in (1.0, -1.0):
        A = frame(p, sign) @ np.linalg.inv(Q)
        moved = p[0] + (f.positions - q[0]) @ A.T
        if away_from is None:
            return f.with_positions(moved)
        normal = np.cross(p[1] - p[0], p[2] - p[0])
        rest = np.delete(moved, list(tri), axis=0)
        side = np.dot(rest.mean(axis=0) - p[0], normal) if len(rest) else 0.0
        ref = np.dot(np.asarray(away_from) - p[0], normal)
        score = -side * np.sign(ref) if ref != 0 else 0.0
        if best is None or score > best[0]:
            best = (score, moved)
    return f.with_positions(best[1])


def compose(
    a: PartitionedFramework,
    tri1: Sequence[int],
    b: PartitionedFramework,
    tri2: Sequence[int],
    correspondence: Optional[dict[int, int]] = None,
    tol: float = CONGRUENCE_TOL,
    verify: bool = True,
) -> PartitionedFramework:
    """Delete triangle ``tri1`` from ``a`` and glue ``b`` onto its nodes at ``tri2``.

    ``correspondence`` maps each node of ``tri2`` to its partner in ``tri1``;
    by default ``tri2[k]`` pairs with ``tri1[k]``. Nodes of ``a`` keep their
    indices, merged nodes of ``b`` take their partner's index, and the other
    nodes of ``b`` are appended in order.
    """
    g1, g2 = a.graph, b.graph
    t1, t2 = tuple(tri1), tuple(tri2)
    if correspondence is None:
        correspondence = dict(zip(t2, t1))
    if sorted(correspondence) != sorted(t2) or sorted(correspondence.values()) != sorted(t1):
        raise ValueError("correspondence must pair the nodes of tri2 with the nodes of tri1")
    key1 = tuple(sorted(t1))
    key2 = tuple(sorted(t2))
    if key1 not in a.partition.key:
        raise TriangleNotInPartition(f"{key1} is not a triangle of the first partition")
    if key2 not in b.partition.key:
        raise TriangleNotInPartition(f"{key2} is not a triangle of the second partition")
    if verify:
        for name, pf in (("first", a), ("second", b)):
            if not is_infinitesimally_rigid(pf.framework):
                raise NotRigidInput(f"the {name} framework is not infinitesimally rigid")

    src = [v for v in t2]
    M = find_transform(a.positions[[correspondence[v] for v in src]], b.positions[src], tol=tol)

    new_index = {}
    nxt = g1.n
    for v in range(g2.n):
        if v in correspondence:
            new_index[v] = correspondence[v]
        else:
            new_index[v] = nxt
            nxt += 1
    removed = {(key1[0], key1[1]), (key1[1], key1[2]), (key1[0], key1[2])}
    edges = [e for e in g1.edges if e not in removed]
    edges += [(new_index[i], new_index[j]) for i, j in g2.edges]
    g = Graph(nxt, tuple(edges))

    extra = [v for v in range(g2.n) if v not in correspondence]
    positions = np.vstack([a.positions, M(b.positions[extra])]) if extra else a.positions.copy()
    f = Framework(g, positions)

    triples = [t for t in a.partition.key if t != key1]
    triples += [tuple(sorted(new_index[v] for v in t)) for t in b.partition.key]
    part = TrianglePartition.from_triples(g, triples)
    out = PartitionedFramework(f, part)
    if verify and not validate_partition(g, part.matrix):
        raise AssertionError("glued partition failed validation")
    return out


def regular_octahedron(edge: float = 1.0) -> Framework:
    """Octahedron graph at the vertices of a regular octahedron with the given edge length."""
    s = edge / np.sqrt(2.0)
    pts = np.array([[s, 0, 0], [0, s, 0], [0, 0, s], [-s, 0, 0], [0, -s, 0], [0, 0, -s]])
    return Framework(octahedron(), pts)


def octahedron_unit(which: int = 0, edge: float = 1.0) -> PartitionedFramework:
    f = regular_octahedron(edge)
    parts = exact_cover_partition(f.graph, find_all=True)
    return PartitionedFramework(f, parts[which % len(parts)])


def random_chained_octahedra(target_n: int, seed: int = 0) -> PartitionedFramework:
    """Glue regular octahedra one at a time onto random partition triangles.

    Every step adds three nodes, so reachable sizes are 6, 9, 12, ...
    """
    if target_n < 6 or target_n % 3:
        raise UnreachableSize(f"{target_n} nodes cannot be reached; sizes are 6 + 3k")
    rng = np.random.Generator(np.random.Philox(seed))
    perms = list(itertools.permutations(range(3)))
    cur = octahedron_unit(int(rng.integers(2)))
    while cur.graph.n < target_n:
        host_tri = cur.partition.key[int(rng.integers(len(cur.partition.key)))]
        unit = octahedron_unit(int(rng.integers(2)))
        anchor = unit.partition.key[int(rng.integers(len(unit.partition.key)))]
        perm = perms[int(rng.integers(len(perms)))]
        pairing = {anchor[k]: host_tri[perm[k]] for k in range(3)}
        cur = compose(cur, host_tri, unit, anchor, correspondence=pairing, verify=False)
    return cur
