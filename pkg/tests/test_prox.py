"""Prox and projection operators: examples, identities, and grid oracles."""

import numpy as np
import pytest

from corrsense import (
    L1,
    L1L2,
    Linf,
    Trace,
    BlockPartition,
    norm_eval,
    project_l1_ball,
    project_l1l2_ball,
    project_l2_ball,
    project_linf_ball,
    project_norm_ball,
    project_trace_ball,
    prox_l1,
    prox_l1l2,
    prox_linf,
    prox_norm,
    prox_trace,
)
from oracles import grid_min, lattice_min_2d, projection_objective, prox_objective


def test_norm_eval_examples():
    assert norm_eval(L1(), np.array([3.0, -4.0])) == 7.0
    assert norm_eval(L1L2(BlockPartition(1, 2)), np.array([3.0, -4.0])) == 5.0
    assert norm_eval(Trace(2, 2), np.eye(2).ravel()) == pytest.approx(2.0, abs=1e-12)
    assert norm_eval(Linf(), np.array([3.0, -4.0])) == 4.0


def test_norm_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        norm_eval(L1L2(BlockPartition(2, 3)), np.zeros(5))
    with pytest.raises(ValueError):
        norm_eval(Trace(2, 2), np.zeros(5))


def test_prox_l1_examples():
    out = prox_l1(np.array([3.0, -0.5, 1.0]), 1.0)
    assert np.allclose(out, [2.0, 0.0, 0.0], atol=1e-15)
    x = np.array([0.3, -2.1, 4.0])
    assert np.array_equal(prox_l1(x, 0.0), x)
    with pytest.raises(ValueError):
        prox_l1(x, -0.1)


def test_prox_l1_2d_against_dense_lattice():
    z = np.array([2.0, 1.0])
    theta = 0.5
    expected = np.array([1.5, 0.5])
    assert np.allclose(prox_l1(z, theta), expected, atol=1e-15)

    def objective(u1, u2):
        return 0.5 * ((u1 - z[0]) ** 2 + (u2 - z[1]) ** 2) + theta * (
            np.abs(u1) + np.abs(u2)
        )

    u_grid, _ = lattice_min_2d(objective, -3.0, 3.0, pts=2001)
    assert np.max(np.abs(u_grid - expected)) <= 2e-3


def test_prox_l1l2_examples():
    part = BlockPartition(1, 2)
    assert np.allclose(prox_l1l2(np.array([3.0, 4.0]), part, 5.0), [0.0, 0.0])
    assert np.allclose(prox_l1l2(np.array([3.0, 4.0]), part, 2.5), [1.5, 2.0])
    # zero block stays zero
    out = prox_l1l2(np.zeros(4), BlockPartition(2, 2), 1.0)
    assert np.array_equal(out, np.zeros(4))
    with pytest.raises(ValueError):
        prox_l1l2(np.array([1.0, 2.0]), part, -1.0)


def test_prox_l1l2_2d_against_dense_lattice():
    part = BlockPartition(1, 2)
    z = np.array([3.0, 4.0])
    theta = 2.5

    def objective(u1, u2):
        return 0.5 * ((u1 - z[0]) ** 2 + (u2 - z[1]) ** 2) + theta * np.sqrt(
            u1 * u1 + u2 * u2
        )

    u_grid, _ = lattice_min_2d(objective, -1.0, 5.0, pts=2001)
    assert np.max(np.abs(u_grid - prox_l1l2(z, part, theta))) <= 2e-3


def test_prox_l1l2_k1_reduces_to_prox_l1():
    rng = np.random.default_rng(0)
    z = rng.normal(size=6)
    part = BlockPartition(6, 1)
    assert np.allclose(prox_l1l2(z, part, 0.7), prox_l1(z, 0.7), atol=1e-15)


def test_prox_trace_examples():
    out = prox_trace(np.diag([3.0, 1.0]), 2.0)
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 3))
    assert np.allclose(prox_trace(a, 0.0), a, atol=1e-10)
    out = prox_trace(a, 0.5)
    sig_in = np.linalg.svd(a, compute_uv=False)
    sig_out = np.linalg.svd(out, compute_uv=False)
    assert np.allclose(sig_out, np.maximum(sig_in - 0.5, 0.0), atol=1e-8)


def test_prox_linf_via_grid():
    z = np.array([2.0, -0.8, 0.3])
    theta = 1.2
    out = prox_linf(z, theta)
    obj = prox_objective(z, theta, lambda u: np.max(np.abs(u)))
    u_grid, val_grid = grid_min(obj, -3.0, 3.0, dims=3)
    assert obj(out) <= val_grid + 1e-6
    assert np.max(np.abs(out - u_grid)) <= 1e-3


def test_project_l2_ball_examples():
    assert np.allclose(project_l2_ball(np.array([3.0, 4.0]), 0.0, 5.0), [3.0, 4.0])
    assert np.allclose(project_l2_ball(np.array([3.0, 4.0]), 0.0, 1.0), [0.6, 0.8])
    out = project_l2_ball(np.array([1.0, 1.0]), np.array([1.0, 0.0]), 0.0)
    assert np.allclose(out, [1.0, 0.0])


def test_project_l1_ball_examples():
    assert np.allclose(project_l1_ball(np.array([2.0, 1.0]), 1.0), [1.0, 0.0])
    z = np.array([0.2, 0.3])
    assert np.array_equal(project_l1_ball(z, 1.0), z)
    assert np.allclose(project_l1_ball(np.array([3.0, 0.0]), 1.0), [1.0, 0.0])


def test_project_l1_ball_2d_against_dense_lattice():
    z = np.array([2.0, 1.0])

    def objective(u1, u2):
        d = (u1 - z[0]) ** 2 + (u2 - z[1]) ** 2
        return d + 1e9 * np.maximum(np.abs(u1) + np.abs(u2) - 1.0, 0.0)

    u_grid, _ = lattice_min_2d(objective, -1.5, 1.5, pts=2001)
    assert np.max(np.abs(u_grid - project_l1_ball(z, 1.0))) <= 2e-3


def test_project_linf_ball_example():
    assert np.allclose(project_linf_ball(np.array([2.0, -0.5]), 1.0), [1.0, -0.5])


def test_project_l1l2_ball_example():
    part = BlockPartition(2, 2)
    out = project_l1l2_ball(np.array([3.0, 4.0, 0.0, 0.0]), part, 1.0)
    assert np.allclose(out, [0.6, 0.8, 0.0, 0.0], atol=1e-12)


def test_project_l1l2_ball_4d_against_grid():
    part = BlockPartition(2, 2)
    z = np.array([3.0, 4.0, 0.5, -0.2])
    radius = 1.5
    out = project_l1l2_ball(z, part, radius)

    def block_norm_sum(u):
        return np.hypot(u[0], u[1]) + np.hypot(u[2], u[3])

    # A lattice search can only localize a minimizer on a curved boundary to
    # about sqrt(pitch * gradient), so compare objective values rather than
    # positions and leave the tight positional check to the variational test.
    obj = projection_objective(z, radius, block_norm_sum)
    u_grid, val_grid = grid_min(obj, -2.0, 4.5, dims=4, levels=8)
    assert float(np.sum((out - z) ** 2)) <= val_grid + 1e-9
    assert np.max(np.abs(out - u_grid)) <= 0.05
    assert block_norm_sum(out) <= radius + 1e-9


def test_project_trace_ball_example():
    out = project_trace_ball(np.diag([3.0, 1.0]), 2.0)
    assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)


def test_project_trace_ball_singular_value_kkt():
    # the singular values of the projection solve the 2-d l1-ball problem
    rng = np.random.default_rng(7)
    a = rng.normal(size=(2, 2))
    radius = 1.0
    out = project_trace_ball(a, radius)
    sig_in = np.linalg.svd(a, compute_uv=False)
    sig_out = np.linalg.svd(out, compute_uv=False)

    def objective(u1, u2):
        d = (u1 - sig_in[0]) ** 2 + (u2 - sig_in[1]) ** 2
        penalty = 1e9 * np.maximum(np.abs(u1) + np.abs(u2) - radius, 0.0)
        return d + penalty

    sig_grid, _ = lattice_min_2d(objective, -0.5, max(sig_in) + 0.5, pts=2001)
    assert np.max(np.abs(np.sort(sig_out) - np.sort(sig_grid))) <= 2e-3


_PROJECTIONS = [
    ("l2", 3, lambda z: project_l2_ball(z, 0.0, 1.3), lambda u: float(np.linalg.norm(u)), 1.3),
    ("l1", 4, lambda z: project_l1_ball(z, 2.0), lambda u: float(np.sum(np.abs(u))), 2.0),
    ("linf", 3, lambda z: project_linf_ball(z, 0.8), lambda u: float(np.max(np.abs(u))), 0.8),
    (
        "l1l2",
        4,
        lambda z: project_l1l2_ball(z, BlockPartition(2, 2), 1.5),
        lambda u: float(np.hypot(u[0], u[1]) + np.hypot(u[2], u[3])),
        1.5,
    ),
    (
        "trace",
        4,
        lambda z: project_trace_ball(z.reshape(2, 2), 1.0).ravel(),
        lambda u: float(np.sum(np.linalg.svd(u.reshape(2, 2), compute_uv=False))),
        1.0,
    ),
]


@pytest.mark.parametrize("name,dim,proj,norm_fn,radius", _PROJECTIONS)
def test_projection_nonexpansive(name, dim, proj, norm_fn, radius):
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(1000):
        u = rng.normal(scale=2.0, size=dim)
        v = rng.normal(scale=2.0, size=dim)
        lhs = np.linalg.norm(proj(u) - proj(v))
        rhs = np.linalg.norm(u - v)
        assert lhs <= rhs * (1.0 + 1e-12) + 1e-12


@pytest.mark.parametrize("name,dim,proj,norm_fn,radius", _PROJECTIONS)
def test_projection_idempotent_and_feasible(name, dim, proj, norm_fn, radius):
    rng = np.random.default_rng(hash(name + "x") % 2**32)
    for _ in range(200):
        z = rng.normal(scale=3.0, size=dim)
        out = proj(z)
        again = proj(out)
        assert np.max(np.abs(again - out)) <= 1e-12
        assert norm_fn(out) <= radius + 1e-9


@pytest.mark.parametrize(
    "name,dim,proj,norm_fn,radius",
    [row for row in _PROJECTIONS if row[0] in ("l1", "linf")],
)
def test_projection_grid_optimality_polytopes(name, dim, proj, norm_fn, radius):
    # Flat faces let the lattice localize the minimizer to within one pitch,
    # so the positional comparison is meaningful here.
    rng = np.random.default_rng(hash(name + "y") % 2**32)
    for _ in range(3):
        z = rng.normal(scale=1.5, size=dim)
        out = proj(z)
        obj = projection_objective(z, radius, lambda u: norm_fn(np.asarray(u)))
        u_grid, val_grid = grid_min(obj, -4.0, 4.0, dims=dim, levels=9)
        assert np.max(np.abs(out - u_grid)) <= 1e-3
        assert float(np.sum((out - z) ** 2)) <= val_grid + 1e-9


def _sample_feasible(name, rng, dim, radius, count):
    """Feasible points built by construction, without using the projections."""
    pts = np.empty((count, dim))
    for i in range(count):
        # half the draws sit on the boundary, where the inequality is tight
        shrink = 1.0 if i % 2 == 0 else rng.uniform()
        if name == "l2":
            d = rng.normal(size=dim)
            pts[i] = radius * shrink * d / np.linalg.norm(d)
        elif name == "l1":
            w = rng.dirichlet(np.ones(dim))
            pts[i] = radius * shrink * w * rng.choice([-1.0, 1.0], size=dim)
        elif name == "linf":
            pts[i] = radius * shrink * rng.uniform(-1.0, 1.0, size=dim)
        elif name == "l1l2":
            norms = radius * shrink * rng.dirichlet(np.ones(2))
            for b in range(2):
                d = rng.normal(size=2)
                pts[i, 2 * b : 2 * b + 2] = norms[b] * d / np.linalg.norm(d)
        elif name == "trace":
            sig = radius * shrink * rng.dirichlet(np.ones(2))
            q1 = np.linalg.qr(rng.normal(size=(2, 2)))[0]
            q2 = np.linalg.qr(rng.normal(size=(2, 2)))[0]
            pts[i] = (q1 @ np.diag(sig) @ q2.T).ravel()
        else:
            raise AssertionError(name)
    return pts


@pytest.mark.parametrize("name,dim,proj,norm_fn,radius", _PROJECTIONS)
def test_projection_variational_inequality(name, dim, proj, norm_fn, radius):
    # out is the metric projection of z iff <z - out, u - out> <= 0 for every
    # feasible u; checking sampled feasible points is an exact certificate up
    # to roundoff, with no grid-resolution limit.
    rng = np.random.default_rng(hash(name + "vi") % 2**32)
    for _ in range(5):
        z = rng.normal(scale=2.0, size=dim)
        out = proj(z)
        feasible = _sample_feasible(name, rng, dim, radius, 2000)
        gaps = (feasible - out) @ (z - out)
        assert float(np.max(gaps)) <= 1e-9


def test_prox_nonexpansive():
    part = BlockPartition(2, 2)
    ops = [
        lambda z: prox_l1(z, 0.6),
        lambda z: prox_linf(z, 0.6),
        lambda z: prox_l1l2(z, part, 0.6),
        lambda z: prox_trace(z.reshape(2, 2), 0.6).ravel(),
    ]
    rng = np.random.default_rng(23)
    for op in ops:
        for _ in range(1000):
            u = rng.normal(scale=2.0, size=4)
            v = rng.normal(scale=2.0, size=4)
            assert np.linalg.norm(op(u) - op(v)) <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12


def test_moreau_identity_l1():
    rng = np.random.default_rng(5)
    for theta in [0.3, 1.0, 2.7]:
        for _ in range(50):
            x = rng.normal(scale=2.0, size=6)
            recon = prox_l1(x, theta) + theta * project_linf_ball(x / theta, 1.0)
            assert np.max(np.abs(recon - x)) <= 1e-12


def test_moreau_identity_linf():
    # dual pairing in the other direction: prox of the max norm plus the
    # l1-ball projection reassembles the input
    rng = np.random.default_rng(6)
    for theta in [0.5, 1.5]:
        for _ in range(50):
            x = rng.normal(scale=2.0, size=5)
            recon = prox_linf(x, theta) + theta * project_l1_ball(x / theta, 1.0)
            assert np.max(np.abs(recon - x)) <= 1e-12


def test_moreau_identity_l1l2():
    part = BlockPartition(3, 2)
    rng = np.random.default_rng(8)
    theta = 0.9
    for _ in range(50):
        x = rng.normal(scale=2.0, size=6)
        # dual ball: every block norm at most theta, projected blockwise
        dual = x.reshape(3, 2).copy()
        norms = np.linalg.norm(dual, axis=1)
        scale = np.minimum(1.0, theta / np.maximum(norms, 1e-300))
        dual *= scale[:, None]
        recon = prox_l1l2(x, part, theta) + dual.ravel()
        assert np.max(np.abs(recon - x)) <= 1e-12


def test_moreau_identity_trace():
    rng = np.random.default_rng(9)
    theta = 0.8
    for _ in range(20):
        a = rng.normal(size=(3, 2))
        u, sig, vt = np.linalg.svd(a, full_matrices=False)
        dual = (u * np.minimum(sig, theta)) @ vt
        recon = prox_trace(a, theta) + dual
        assert np.max(np.abs(recon - a)) <= 1e-12


def test_dispatchers_match_direct_calls():
    rng = np.random.default_rng(10)
    z = rng.normal(size=4)
    part = BlockPartition(2, 2)
    assert np.array_equal(prox_norm(L1(), z, 0.4), prox_l1(z, 0.4))
    assert np.array_equal(prox_norm(Linf(), z, 0.4), prox_linf(z, 0.4))
    assert np.array_equal(prox_norm(L1L2(part), z, 0.4), prox_l1l2(z, part, 0.4))
    assert np.array_equal(
        prox_norm(Trace(2, 2), z, 0.4), prox_trace(z.reshape(2, 2), 0.4).ravel()
    )
    assert np.array_equal(project_norm_ball(L1(), z, 1.0), project_l1_ball(z, 1.0))
    assert np.array_equal(project_norm_ball(Linf(), z, 1.0), project_linf_ball(z, 1.0))
    assert np.array_equal(
        project_norm_ball(L1L2(part), z, 1.0), project_l1l2_ball(z, part, 1.0)
    )
    assert np.array_equal(
        project_norm_ball(Trace(2, 2), z, 1.0),
        project_trace_ball(z.reshape(2, 2), 1.0).ravel(),
    )
