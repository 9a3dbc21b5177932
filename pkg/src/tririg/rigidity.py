"""Rigidity matrix, infinitesimal rigidity and the worst-case rigidity index."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import TooFewNodes
from .graph import Graph

RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Framework:
    """A graph with one point in R^3 per node."""

    graph: Graph
    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float).reshape(-1, 3)
        if p.shape[0] != self.graph.n:
            raise ValueError(f"{p.shape[0]} positions for {self.graph.n} nodes")
        if not np.isfinite(p).all():
            raise ValueError("positions must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def n(self) -> int:
        return self.graph.n

    def with_positions(self, positions) -> "Framework":
        return Framework(self.graph, positions)

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        if self.graph.m == 0:
            return np.zeros((0, 3))
        e = np.asarray(self.graph.edges)
        return self.positions[e[:, 0]] - self.positions[e[:, 1]]

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors, axis=1)


@dataclass(frozen=True)
class RigidityReport:
    rank: int
    rigid: bool
    wcr: float
    lambda7: float

    def to_dict(self) -> dict:
        return {"rank": self.rank, "rigid": self.rigid, "lambda7": self.lambda7, "wcr": self.wcr}


def rigidity_matrix(f: Framework) -> np.ndarray:
    """|E| x 3n matrix with (p_i - p_j) in node i's block and (p_j - p_i) in node j's.

    Rows are not normalised, so (R v)_e = (p_i - p_j) . (v_i - v_j), which is
    the edge length times its rate of change.
    """
    g = f.graph
    R = np.zeros((g.m, 3 * g.n))
    diff = f.edge_vectors
    for k, (i, j) in enumerate(g.edges):
        R[k, 3 * i:3 * i + 3] = diff[k]
        R[k, 3 * j:3 * j + 3] = -diff[k]
    return R


def numerical_rank(M: np.ndarray, rel_tol: float = RANK_RTOL) -> int:
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def _require_nodes(f: Framework):
    if f.n < 3:
        raise TooFewNodes(f"need at least 3 nodes, got {f.n}")


def is_infinitesimally_rigid(f: Framework, rel_tol: float = RANK_RTOL) -> bool:
    _require_nodes(f)
    return numerical_rank(rigidity_matrix(f), rel_tol) == 3 * f.n - 6


def gram_spectrum(R: np.ndarray, n: int) -> np.ndarray:
    """Ascending eigenvalues of R^T R (length 3n), from the singular values of R."""
    s = np.linalg.svd(R, compute_uv=False) if R.size else np.zeros(0)
    eig = np.zeros(3 * n)
    eig[: len(s)] = s**2
    return np.sort(eig)


def rigidity_report(f: Framework, rel_tol: float = RANK_RTOL) -> RigidityReport:
    _require_nodes(f)
    R = rigidity_matrix(f)
    eig = gram_spectrum(R, f.n)
    top = np.sqrt(eig[-1]) if eig.size else 0.0
    rank = int(np.count_nonzero(np.sqrt(eig) > rel_tol * top)) if top > 0 else 0
    rigid = rank == 3 * f.n - 6
    lam7 = float(eig[6])
    trace = float(eig.sum())
    # each row holds (p_i - p_j) twice over, so the trace is twice the sum of squared lengths
    by_lengths = 2.0 * float(np.sum(f.edge_lengths**2))
    if not np.isclose(trace, by_lengths, rtol=1e-9, atol=1e-300):
        raise AssertionError(f"trace mismatch: {trace} vs {by_lengths}")
    wcr = lam7 / trace if rigid and trace > 0 else 0.0
    return RigidityReport(rank=rank, rigid=rigid, wcr=wcr, lambda7=lam7)


def worst_case_rigidity_index(f: Framework) -> float:
    """lambda_7(R^T R) / tr(R^T R); zero for frameworks that are not rigid."""
    return rigidity_report(f).wcr


def trivial_motions(positions: np.ndarray) -> np.ndarray:
    """The 6 rigid-motion velocity fields (3 translations, 3 rotations about the centroid), as rows."""
    p = np.asarray(positions, dtype=float)
    n = len(p)
    c = p - p.mean(axis=0)
    out = np.zeros((6, 3 * n))
    for a in range(3):
        out[a, a::3] = 1.0
        axis = np.eye(3)[a]
        out[3 + a] = np.cross(axis, c).ravel()
    return out
