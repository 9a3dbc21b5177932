import numpy as np
import pytest

from tririg.composition import octahedron_unit
from tririg.errors import DegenerateHull, InfeasibleConstraints
from tririg.rigidity import Framework, worst_case_rigidity_index
from tririg.workspace import (
    IkProblem,
    WorkspaceConfig,
    edge_jacobian,
    ik_velocity,
    perimeters,
    run_workspace,
    sphere_targets,
    trace_to_target,
    wcr_gradient,
    workspace_volume,
)

BASE, MOVING = (0, 1, 3), 4


@pytest.fixture
def unit():
    return octahedron_unit(0)


def problem(pf, base=BASE, moving=MOVING):
    return IkProblem(pf.framework, pf.partition, base, moving)


def test_sphere_targets_200():
    pts, faces = sphere_targets(200, 6.0)
    assert pts.shape == (200, 3)
    assert len(faces) == 396
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 6.0, atol=1e-12)
    # outward orientation gives a positive signed volume
    a, b, c = pts[faces[:, 0]], pts[faces[:, 1]], pts[faces[:, 2]]
    assert (np.einsum("ij,ij->i", a, np.cross(b, c)) > 0).all()


def test_sphere_targets_small():
    pts, faces = sphere_targets(4, 1.0, center=(1, 2, 3))
    assert len(faces) == 4
    np.testing.assert_allclose(np.linalg.norm(pts - [1, 2, 3], axis=1), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        sphere_targets(3)


def test_sphere_triangulation_watertight():
    _, faces = sphere_targets(50)
    edges = {}
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    # every directed edge appears once and its reverse once
    assert all(v == 1 for v in edges.values())
    assert all((b, a) in edges for a, b in edges)


def test_volume_examples():
    pts, faces = sphere_targets(200, 1.0)
    v = workspace_volume(pts, faces)
    assert v == pytest.approx(4 * np.pi / 3, rel=0.05)
    assert v < 4 * np.pi / 3
    assert workspace_volume(2 * pts, faces) == pytest.approx(8 * v, rel=1e-12)
    with pytest.raises(DegenerateHull):
        workspace_volume(np.ones_like(pts), faces)


def test_volume_cube():
    # unit cube split into 12 outward triangles
    pts = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(pts)
    faces = hull.simplices.copy()
    # qhull does not orient simplices; flip the ones facing inward
    a, b, c = (pts[faces[:, k]] - 0.5 for k in range(3))
    inward = np.einsum("ij,ij->i", a, np.cross(b, c)) < 0
    faces[inward] = faces[inward][:, ::-1]
    assert workspace_volume(pts, faces) == pytest.approx(1.0)


def test_ik_velocity_constraints(unit):
    p = problem(unit)
    xdot = ik_velocity(p, [0.0, 0.0, 1.0])
    v = xdot.reshape(-1, 3)
    np.testing.assert_allclose(v[MOVING], [0, 0, 1], atol=1e-9)
    assert np.abs(v[list(BASE)]).max() <= 1e-12
    T = unit.partition.matrix.astype(float)
    assert np.abs(T.T @ edge_jacobian(unit.framework) @ xdot).max() <= 1e-9


def test_ik_velocity_infeasible(unit):
    # node 2 shares triangle (0,1,2) with two fixed nodes, so it is confined to a surface
    p = IkProblem(unit.framework, unit.partition, (0, 1, 4), 2)
    with pytest.raises(InfeasibleConstraints):
        ik_velocity(p, [0.0, 0.0, 1.0])
    # a tangent direction is fine
    ik_velocity(p, np.array([1.0, 1.0, 1.0]) / np.sqrt(3))


def test_problem_validation(unit):
    with pytest.raises(ValueError):
        IkProblem(unit.framework, unit.partition, (0, 1, 1), 4)
    with pytest.raises(ValueError):
        IkProblem(unit.framework, unit.partition, (0, 1, 3), 3)


def test_edge_jacobian_is_length_gradient(unit):
    f = unit.framework
    rng = np.random.default_rng(0)
    v = rng.normal(size=3 * f.n)
    h = 1e-7
    fd = (f.with_positions(f.positions + h * v.reshape(-1, 3)).edge_lengths - f.edge_lengths) / h
    np.testing.assert_allclose(edge_jacobian(f) @ v, fd, atol=1e-5)


def test_wcr_gradient_direction(unit):
    # away from the symmetric configuration, where the index is not smooth
    f = unit.framework
    f = f.with_positions(f.positions + 0.05 * np.random.default_rng(1).normal(size=f.positions.shape))
    g = wcr_gradient(f)
    step = 1e-4 * g / np.linalg.norm(g)
    up = worst_case_rigidity_index(f.with_positions(f.positions + step.reshape(-1, 3)))
    assert up > worst_case_rigidity_index(f)


def test_short_move_reaches(unit):
    p = problem(unit)
    start = unit.positions[MOVING]
    target = start + 1e-3 * np.array([0.0, 0.6, 0.8])
    tr = trace_to_target(p, target, WorkspaceConfig())
    assert tr.reason == "reached"
    np.testing.assert_allclose(tr.reached, target, atol=1e-9)


def long_traces(pf, count=12, cfg=WorkspaceConfig()):
    targets, _ = sphere_targets(count, cfg.radius, pf.positions[MOVING])
    return [trace_to_target(problem(pf), t, cfg) for t in targets]


def test_trace_invariants(unit):
    cfg = WorkspaceConfig()
    for tr in long_traces(unit, cfg=cfg):
        f = tr.final
        assert f.edge_lengths.min() >= cfg.min_edge
        assert worst_case_rigidity_index(f) >= cfg.min_wcr
        assert np.abs(f.positions[list(BASE)] - unit.positions[list(BASE)]).max() < 1e-9
        dist = np.linalg.norm(tr.path - tr.target, axis=1)
        assert (np.diff(dist) <= 1e-12).all()
        assert tr.reason in {"reached", "stalled", "max_steps", "infeasible", "blocked"}
        # each active row was triggered at a recorded step
        assert all(0 < s <= tr.steps for s in tr.active.steps)
        assert tr.perimeter_drift <= 50 * cfg.dt


def test_perimeter_drift_halves(unit):
    # a short straight move that stays well inside the feasible region
    target = unit.positions[MOVING] + 0.15 * np.array([0.0, 0.0, 1.0])
    drift = []
    for dt in (0.01, 0.005, 0.0025):
        tr = trace_to_target(problem(unit), target, WorkspaceConfig(dt=dt))
        assert tr.reason == "reached" and len(tr.active) == 0
        drift.append(tr.perimeter_drift)
    for a, b in zip(drift, drift[1:]):
        assert b / a == pytest.approx(0.5, abs=0.1)


def test_constraint_activation_on_long_move(unit):
    cfg = WorkspaceConfig()
    tr = long_traces(unit, 4, cfg)[0]
    assert len(tr.active) >= 1
    assert set(tr.active.kinds()) <= {"min_edge", "wcr"}


def test_nv_scale_invariance(unit):
    cfg = WorkspaceConfig(targets=24, dt=0.02)
    r1 = run_workspace(unit.framework, unit.partition, BASE, MOVING, cfg)
    s = 2.5
    f2 = Framework(unit.graph, unit.positions * s)
    r2 = run_workspace(f2, unit.partition, BASE, MOVING, cfg.scaled(s))
    assert r2.volume == pytest.approx(s**3 * r1.volume, rel=1e-6)
    assert r2.normalized_volume == pytest.approx(r1.normalized_volume, rel=0.01)
    assert r2.max_edge == pytest.approx(s * r1.max_edge)


def test_run_workspace_result(unit):
    cfg = WorkspaceConfig(targets=16, dt=0.02)
    res = run_workspace(unit.framework, unit.partition, BASE, MOVING, cfg)
    assert len(res.reached) == len(res.targets) == 16
    assert res.volume > 0
    assert res.normalized_volume == pytest.approx(res.volume / res.max_edge**3)
    assert res.summary() == {"volume": res.volume, "nv": res.normalized_volume, "l_max": res.max_edge}
    # the robot is reset before each target, so order and worker count do not matter
    par = run_workspace(unit.framework, unit.partition, BASE, MOVING, cfg, jobs=2)
    np.testing.assert_array_equal(par.reached, res.reached)


def test_perimeters_helper(unit):
    per = perimeters(unit.framework, unit.partition)
    np.testing.assert_allclose(per, 3.0)


def test_trace_bookkeeping(unit):
    for tr in long_traces(unit, 6):
        assert len(tr.drift_path) == len(tr.path)
        assert tr.drift_path[-1] == pytest.approx(tr.perimeter_drift)
        assert (tr.first_activation is None) == (len(tr.active) == 0)
        s = tr.arc_length()
        assert s[0] == 0 and (np.diff(s) >= 0).all()


def test_face_base_confines_apex():
    # in the partition without the base face, node 3 shares triangle (1,2,3) with two
    # fixed nodes and can only slide on a spheroid, so the reached set is flat
    cfg = WorkspaceConfig(targets=16, dt=0.02)
    a, b = octahedron_unit(0), octahedron_unit(1)
    assert (0, 1, 2) in a.partition.key and (1, 2, 3) in b.partition.key
    assert run_workspace(a.framework, a.partition, (0, 1, 2), 3, cfg).volume > 0
    with pytest.raises(DegenerateHull):
        run_workspace(b.framework, b.partition, (0, 1, 2), 3, cfg)
