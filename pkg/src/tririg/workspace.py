"""Single-node workspace of an isoperimetric truss robot.

The moving node is driven in a straight line toward each target on a sphere
while three base nodes stay fixed and every triangle of the partition keeps
its perimeter. Joint velocities come from an equality-constrained least-squares
problem; state constraints (minimum edge length, worst-case rigidity index) are
handled by rolling back the offending step and holding the violated
constraint's gradient at equality for the rest of that target.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateHull, InfeasibleConstraints
from .partition import TrianglePartition, validate_partition
from .rigidity import Framework, rigidity_matrix, worst_case_rigidity_index

log = logging.getLogger(__name__)

RIDGE = 1e-10
FD_STEP = 1e-6
VOLUME_FLOOR = 1e-12

MIN_EDGE = "min_edge"
RIGIDITY = "wcr"


@dataclass(frozen=True)
class WorkspaceConfig:
    dt: float = 0.01
    min_edge: float = 0.2
    min_wcr: float = 0.005
    stall: float = 1e-5
    max_steps: int = 5000
    targets: int = 200
    radius: float = 6.0
    reach_tol: float = 1e-9

    def scaled(self, s: float) -> "WorkspaceConfig":
        """The same experiment for a framework uniformly scaled by ``s``."""
        return replace(
            self,
            dt=self.dt * s,
            min_edge=self.min_edge * s,
            stall=self.stall * s,
            radius=self.radius * s,
            reach_tol=self.reach_tol * s,
        )


@dataclass
class ConstraintRows:
    """Gradients of state constraints activated by a violation, one row each.

    ``keys`` identify the constraint (``("min_edge", k)`` or ``("wcr",)``),
    ``steps`` record the step at which it fired and ``hold`` the constraint
    value the row keeps in place.
    """

    keys: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    hold: list = field(default_factory=list)

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key):
        return key in self.keys

    def add(self, key, step: int, value: float):
        self.keys.append(key)
        self.steps.append(step)
        self.hold.append(value)

    def kinds(self) -> list[str]:
        return [k[0] for k in self.keys]


@dataclass
class IkProblem:
    framework: Framework
    partition: TrianglePartition
    base_nodes: tuple[int, int, int]
    moving_node: int
    active: ConstraintRows = field(default_factory=ConstraintRows)

    def __post_init__(self):
        n = self.framework.n
        base = tuple(int(v) for v in self.base_nodes)
        if len(set(base)) != 3 or any(not 0 <= v < n for v in base):
            raise ValueError(f"base must be 3 distinct nodes in range, got {base}")
        if not 0 <= self.moving_node < n or self.moving_node in base:
            raise ValueError(f"moving node {self.moving_node} must be a non-base node")
        if self.partition.graph != self.framework.graph:
            raise ValueError("partition belongs to a different graph")
        self.base_nodes = base


def edge_jacobian(f: Framework) -> np.ndarray:
    """d(edge length)/dx, i.e. the rigidity matrix with each row divided by its length."""
    R = rigidity_matrix(f)
    return R / f.edge_lengths[:, None]


def perimeters(f: Framework, partition: TrianglePartition) -> np.ndarray:
    return partition.matrix.T.astype(float) @ f.edge_lengths


def _constraint_value(f: Framework, key) -> float:
    if key[0] == MIN_EDGE:
        return float(f.edge_lengths[key[1]])
    return worst_case_rigidity_index(f)


def wcr_gradient(f: Framework, h: float = FD_STEP) -> np.ndarray:
    """Forward-difference gradient of the worst-case rigidity index."""
    x0 = f.positions.ravel()
    base = worst_case_rigidity_index(f)
    g = np.empty_like(x0)
    for k in range(len(x0)):
        x = x0.copy()
        x[k] += h
        g[k] = (worst_case_rigidity_index(f.with_positions(x.reshape(-1, 3))) - base) / h
    return g


def _constraint_gradient(f: Framework, key) -> np.ndarray:
    if key[0] == MIN_EDGE:
        return edge_jacobian(f)[key[1]]
    return wcr_gradient(f)


def ik_velocity(p: IkProblem, direction, dt: float = 1.0, f: Optional[Framework] = None) -> np.ndarray:
    """Velocity minimising |R xdot|^2 under the stacked equality constraints.

    Rows: moving node velocity equals ``direction``; base nodes still; zero
    perimeter rate for every partition triangle; every active constraint held
    at the value recorded when it fired (a drift term divided by ``dt`` pulls
    it back after each Euler step).
    """
    f = p.framework if f is None else f
    n3 = 3 * f.n
    rows, rhs = [], []
    m = p.moving_node
    A = np.zeros((3, n3))
    A[:, 3 * m:3 * m + 3] = np.eye(3)
    rows.append(A)
    rhs.append(np.asarray(direction, dtype=float))
    C = np.zeros((9, n3))
    for k, v in enumerate(p.base_nodes):
        C[3 * k:3 * k + 3, 3 * v:3 * v + 3] = np.eye(3)
    rows.append(C)
    rhs.append(np.zeros(9))
    J = edge_jacobian(f)
    T = p.partition.matrix.astype(float)
    rows.append(T.T @ J)
    rhs.append(np.zeros(T.shape[1]))
    for key, held in zip(p.active.keys, p.active.hold):
        rows.append(_constraint_gradient(f, key)[None, :])
        rhs.append(np.array([(held - _constraint_value(f, key)) / dt]))
    E = np.vstack(rows)
    c = np.concatenate(rhs)

    R = rigidity_matrix(f)
    H = 2.0 * (R.T @ R + RIDGE * np.eye(n3))
    K = np.block([[H, E.T], [E, np.zeros((len(E), len(E)))]])
    sol = np.linalg.lstsq(K, np.concatenate([np.zeros(n3), c]), rcond=None)[0]
    xdot = sol[:n3]
    resid = np.abs(E @ xdot - c).max()
    if resid > 1e-8 * (1.0 + np.abs(c).max()):
        raise InfeasibleConstraints(f"equality residual {resid:.2e}")
    return xdot


def _violations(f: Framework, cfg: WorkspaceConfig) -> list:
    out = [(MIN_EDGE, int(k)) for k in np.flatnonzero(f.edge_lengths < cfg.min_edge)]
    if worst_case_rigidity_index(f) < cfg.min_wcr:
        out.append((RIGIDITY,))
    return out


@dataclass
class Trace:
    target: np.ndarray
    reached: np.ndarray
    final: Framework
    steps: int
    reason: str
    active: ConstraintRows
    perimeter_drift: float
    path: np.ndarray  # moving-node position after every accepted step, start included
    drift_path: np.ndarray  # largest perimeter deviation at each path point
    first_activation: Optional[int] = None  # path index where the first state constraint fired

    def arc_length(self) -> np.ndarray:
        """Cumulative distance travelled by the moving node along ``path``."""
        return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(self.path, axis=0), axis=1))])


def trace_to_target(p: IkProblem, target, cfg: WorkspaceConfig = WorkspaceConfig()) -> Trace:
    """Drive the moving node toward ``target`` with forward-Euler steps of ``cfg.dt``.

    Returns the last feasible state. ``reason`` is one of ``reached``,
    ``stalled``, ``max_steps``, ``infeasible`` or ``blocked`` (an already
    active constraint was violated again).
    """
    if cfg.dt <= 0:
        raise ValueError("dt must be positive")
    target = np.asarray(target, dtype=float)
    p.active = ConstraintRows()
    f = p.framework
    per0 = perimeters(f, p.partition)
    m = p.moving_node
    reason = "max_steps"
    steps = 0
    path = [f.positions[m].copy()]
    drift_path = [0.0]
    first = None
    while steps < cfg.max_steps:
        gap = target - f.positions[m]
        dist = float(np.linalg.norm(gap))
        if dist <= cfg.reach_tol:
            reason = "reached"
            break
        try:
            xdot = ik_velocity(p, gap / dist, cfg.dt, f)
        except InfeasibleConstraints:
            reason = "infeasible"
            break
        h = min(cfg.dt, dist)
        trial = f.with_positions(f.positions + h * xdot.reshape(-1, 3))
        steps += 1
        bad = _violations(trial, cfg)
        if bad:
            fresh = [k for k in bad if k not in p.active]
            if not fresh:
                reason = "blocked"
                break
            # roll back: keep f, hold the new constraints where they stand now
            if first is None:
                first = len(path) - 1
            for key in fresh:
                p.active.add(key, steps, _constraint_value(f, key))
            continue
        moved = float(np.linalg.norm(trial.positions[m] - f.positions[m]))
        f = trial
        path.append(f.positions[m].copy())
        drift_path.append(float(np.abs(perimeters(f, p.partition) - per0).max()))
        if moved < cfg.stall:
            reason = "stalled" if np.linalg.norm(target - f.positions[m]) > cfg.reach_tol else "reached"
            break
    drift = float(np.abs(perimeters(f, p.partition) - per0).max())
    return Trace(target, f.positions[m].copy(), f, steps, reason, p.active, drift, np.array(path), np.array(drift_path), first)


def sphere_targets(count: int, radius: float = 6.0, center=(0.0, 0.0, 0.0)):
    """Fibonacci-spiral points on a sphere and the outward-oriented triangles of their hull."""
    if count < 4:
        raise ValueError("need at least 4 targets")
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(1.0 - z**2)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * k
    unit = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    unit /= np.linalg.norm(unit, axis=1)[:, None]
    faces = _outward(unit, ConvexHull(unit).simplices)
    return np.asarray(center, dtype=float) + radius * unit, faces


def _outward(points: np.ndarray, faces: np.ndarray) -> np.ndarray:
    faces = np.array(faces, dtype=int)
    c = points.mean(axis=0)
    a, b, d = points[faces[:, 0]], points[faces[:, 1]], points[faces[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, d - a), a - c) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def workspace_volume(points, faces) -> float:
    """Volume enclosed by the triangulated points, from tetrahedra against their centroid."""
    pts = np.asarray(points, dtype=float)
    faces = np.asarray(faces, dtype=int)
    c = pts.mean(axis=0)
    a, b, d = pts[faces[:, 0]] - c, pts[faces[:, 1]] - c, pts[faces[:, 2]] - c
    vol = abs(float(np.einsum("ij,ij->i", a, np.cross(b, d)).sum()) / 6.0)
    if vol < VOLUME_FLOOR:
        raise DegenerateHull(f"enclosed volume {vol:.3e} is below {VOLUME_FLOOR}")
    return vol


@dataclass
class WorkspaceResult:
    targets: np.ndarray
    reached: np.ndarray
    triangulation: np.ndarray
    volume: float
    normalized_volume: float
    max_edge: float
    steps: list[int]
    reasons: list[str]
    # per trace: perimeter drift, moving-node path length, final min edge and index
    drift: np.ndarray
    path_length: np.ndarray
    final_min_edge: np.ndarray
    final_wcr: np.ndarray

    def summary(self) -> dict:
        return {"volume": self.volume, "nv": self.normalized_volume, "l_max": self.max_edge}


def _run_one(args):
    framework, partition, base, moving, target, cfg = args
    tr = trace_to_target(IkProblem(framework, partition, base, moving), target, cfg)
    length = float(tr.arc_length()[-1])
    return (
        tr.reached, tr.steps, tr.reason, tr.perimeter_drift, length,
        float(tr.final.edge_lengths.min()), worst_case_rigidity_index(tr.final),
    )


def run_workspace(
    framework: Framework,
    partition: TrianglePartition,
    base: Sequence[int],
    moving: int,
    cfg: WorkspaceConfig = WorkspaceConfig(),
    jobs: int = 1,
) -> WorkspaceResult:
    """Sweep all sphere targets from the initial configuration and measure the reached volume.

    The sphere is centred on the moving node's starting position. Results are
    keyed by target index, so ``jobs`` only changes the wall time.
    """
    if not validate_partition(framework.graph, partition.matrix):
        raise ValueError("partition is not valid for this graph")
    IkProblem(framework, partition, tuple(base), moving)
    start = framework.positions[moving]
    targets, faces = sphere_targets(cfg.targets, cfg.radius, start)
    work = [(framework, partition, tuple(base), moving, t, cfg) for t in targets]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_run_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        out = [_run_one(w) for w in work]
    reached = np.array([o[0] for o in out])
    l_max = float(framework.edge_lengths.max())
    vol = workspace_volume(reached, faces)
    log.info("workspace volume %.4g, NV %.4g", vol, vol / l_max**3)
    return WorkspaceResult(
        targets=targets,
        reached=reached,
        triangulation=faces,
        volume=vol,
        normalized_volume=vol / l_max**3,
        max_edge=l_max,
        steps=[o[1] for o in out],
        reasons=[o[2] for o in out],
        drift=np.array([o[3] for o in out]),
        path_length=np.array([o[4] for o in out]),
        final_min_edge=np.array([o[5] for o in out]),
        final_wcr=np.array([o[6] for o in out]),
    )
