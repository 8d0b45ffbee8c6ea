"""Monte Carlo estimation of tangent-cone squared complexity.

For each Gaussian sample g the squared distance to the scaled
subdifferential t * d||x|| at a representative x of the class is written
in closed form, then minimized over the scaling t. Averaging the per
sample minima estimates the quantity the closed-form bounds in the
geometry module upper-bound, which is what makes the cross-checks there
meaningful: the estimate must land below every bound up to sampling
error.

The representative is canonical unless an exemplar seed is given: unit
entries on the leading support for sparse and block classes, all +1 for
binary, the leading identity embedding for low rank. Seeding randomizes
support, signs, or the partial isometry; the distance law is invariant
to that choice, which the tests exercise.
"""

import math

import numpy as np

from .generate import Seed, normals, uniforms, _choose_without_replacement
from .geometry import MONTE_CARLO, ComplexityEstimate
from .structures import Binary, BlockSparse, LowRank, Sparse

_T_TOL = 1e-8
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, hi):
    a, b = 0.0, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > _T_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return f(0.5 * (a + b))


def _sparse_sample_min(g, support, signs, off_mask):
    h = g[support] * signs
    off = np.abs(g[off_mask])

    def dist_sq(t):
        on = h - t
        tail = np.maximum(off - t, 0.0)
        return float(on @ on + tail @ tail)

    hi = max(float(h.max(initial=0.0)), float(off.max(initial=0.0)), 0.0) + 1.0
    return _golden(dist_sq, hi)


def _block_sample_min(g, active, dirs, m, k):
    blocks = g.reshape(m, k)
    act = blocks[active]
    c = np.sum(act * dirs, axis=1)
    base = float(np.sum(act * act) - c @ c)
    mask = np.ones(m, dtype=bool)
    mask[active] = False
    offn = np.sqrt(np.sum(blocks[mask] * blocks[mask], axis=1))

    def dist_sq(t):
        on = c - t
        tail = np.maximum(offn - t, 0.0)
        return base + float(on @ on + tail @ tail)

    hi = max(float(c.max(initial=0.0)), float(offn.max(initial=0.0)), 0.0) + 1.0
    return _golden(dist_sq, hi)


def _lowrank_sample_min(g, u_full, v_full, r):
    rot = u_full.T @ (g @ v_full)
    a = rot[:r, :r]
    corner = rot[r:, r:]
    cross = float(np.sum(rot * rot) - np.sum(a * a) - np.sum(corner * corner))
    tr = float(np.trace(a))
    a_sq = float(np.sum(a * a))
    sig = np.linalg.svd(corner, compute_uv=False) if corner.size else np.zeros(0)

    def dist_sq(t):
        tail = np.maximum(sig - t, 0.0)
        return a_sq - 2.0 * t * tr + r * t * t + cross + float(tail @ tail)

    hi = max(float(sig.max(initial=0.0)), tr / r if r else 0.0, 0.0) + 1.0
    return _golden(dist_sq, hi)


def _random_orthogonal(seed, dim):
    return np.linalg.qr(normals(seed, dim * dim).reshape(dim, dim))[0]


def mc_complexity(structure, exemplar_seed, samples, seed):
    """Sample mean of min_t dist^2(g, t * subdifferential) with its standard error."""
    if samples < 100:
        raise ValueError(f"need at least 100 samples for a usable standard error, got {samples}")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    ex = None
    if exemplar_seed is not None:
        ex = exemplar_seed if isinstance(exemplar_seed, Seed) else Seed(int(exemplar_seed))

    if isinstance(structure, Sparse):
        p, s = structure.p, structure.s
        if ex is None:
            support = np.arange(s)
            signs = np.ones(s)
        else:
            support = _choose_without_replacement(s, p, ex.child("support"))
            signs = np.where(uniforms(ex.child("signs"), s) < 0.5, -1.0, 1.0)
        off_mask = np.ones(p, dtype=bool)
        off_mask[support] = False
        sample = lambda g: _sparse_sample_min(g, support, signs, off_mask)
        dim = p
    elif isinstance(structure, BlockSparse):
        m, k, s = structure.m, structure.k, structure.s
        if ex is None:
            active = np.arange(s)
            dirs = np.full((s, k), 1.0 / math.sqrt(k))
        else:
            active = _choose_without_replacement(s, m, ex.child("support"))
            raw = normals(ex.child("dirs"), s * k).reshape(s, k)
            dirs = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        sample = lambda g: _block_sample_min(g, active, dirs, m, k)
        dim = m * k
    elif isinstance(structure, Binary):
        p = structure.p
        if ex is None:
            x = np.ones(p)
        else:
            x = np.where(uniforms(ex.child("signs"), p) < 0.5, -1.0, 1.0)
        # the union over t of the scaled subdifferentials is the normal
        # cone {w : w_i x_i >= 0}, so no line search is needed here
        sample = lambda g: float(np.sum(np.minimum(g * x, 0.0) ** 2))
        dim = p
    elif isinstance(structure, LowRank):
        m1, m2, r = structure.m1, structure.m2, structure.r
        if r == 0:
            raise ValueError("rank-0 representative has an empty subdifferential scaling")
        if ex is None:
            u_full = np.eye(m1)
            v_full = np.eye(m2)
        else:
            # any orthogonal pair works: the representative is the first r
            # columns of each, and the distance law is rotation invariant
            u_full = _random_orthogonal(ex.child("left"), m1)
            v_full = _random_orthogonal(ex.child("right"), m2)
        sample = lambda g: _lowrank_sample_min(g.reshape(m1, m2), u_full, v_full, r)
        dim = m1 * m2
    else:
        raise TypeError(f"unsupported structure {structure!r}")

    vals = np.empty(samples)
    for i in range(samples):
        vals[i] = sample(normals(seed.child("sample", i), dim))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    return ComplexityEstimate(mean, None, MONTE_CARLO, std_error=se, samples=samples)
