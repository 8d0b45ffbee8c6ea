"""Proximal operators and norm-ball projections for the splitting solver.

Four norm families are supported: l1, block l1/l2 over a contiguous
partition, l-infinity, and the trace norm of a matrix stored flattened
row-major. Each family gets its norm evaluation, the prox of theta*norm,
and the Euclidean projection onto its norm ball. All operators accept and
return 1-d float arrays (matrices flattened), never mutate their inputs,
and are nonexpansive.
"""

from dataclasses import dataclass

import numpy as np

from .structures import BlockPartition


@dataclass(frozen=True)
class L1:
    pass


@dataclass(frozen=True)
class Linf:
    pass


@dataclass(frozen=True)
class L1L2:
    partition: BlockPartition


@dataclass(frozen=True)
class Trace:
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise ValueError(f"matrix dimensions must be positive, got {self.m1}x{self.m2}")


def _as_blocks(x, partition):
    x = np.asarray(x, dtype=float)
    if x.size != partition.dim:
        raise ValueError(f"vector length {x.size} does not match partition dimension {partition.dim}")
    return x.reshape(partition.m, partition.k)


def _as_matrix(x, m1, m2):
    x = np.asarray(x, dtype=float)
    if x.size != m1 * m2:
        raise ValueError(f"vector length {x.size} does not match matrix shape {m1}x{m2}")
    return x.reshape(m1, m2)


def norm_eval(kind, vector):
    """Evaluate the norm named by kind on a flat vector."""
    v = np.asarray(vector, dtype=float)
    if isinstance(kind, L1):
        return float(np.sum(np.abs(v)))
    if isinstance(kind, Linf):
        return float(np.max(np.abs(v))) if v.size else 0.0
    if isinstance(kind, L1L2):
        blocks = _as_blocks(v, kind.partition)
        return float(np.sum(np.sqrt(np.sum(blocks * blocks, axis=1))))
    if isinstance(kind, Trace):
        mat = _as_matrix(v, kind.m1, kind.m2)
        return float(np.sum(np.linalg.svd(mat, compute_uv=False)))
    raise TypeError(f"unknown norm kind {kind!r}")


def prox_l1(vector, theta):
    """Soft threshold: sign(x) * (|x| - theta)_+."""
    if theta < 0:
        raise ValueError(f"prox parameter must be nonnegative, got {theta}")
    v = np.asarray(vector, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def prox_l1l2(vector, partition, theta):
    """Block soft threshold: each block scaled by (1 - theta/||block||)_+."""
    if theta < 0:
        raise ValueError(f"prox parameter must be nonnegative, got {theta}")
    blocks = _as_blocks(vector, partition).copy()
    norms = np.sqrt(np.sum(blocks * blocks, axis=1))
    # zero blocks stay zero; guard the division
    scale = np.zeros_like(norms)
    nz = norms > 0
    scale[nz] = np.maximum(1.0 - theta / norms[nz], 0.0)
    blocks *= scale[:, None]
    return blocks.reshape(-1)


def prox_trace(matrix, theta):
    """Singular-value soft threshold of a 2-d array."""
    if theta < 0:
        raise ValueError(f"prox parameter must be nonnegative, got {theta}")
    a = np.asarray(matrix, dtype=float)
    u, sig, vt = np.linalg.svd(a, full_matrices=False)
    return (u * np.maximum(sig - theta, 0.0)) @ vt


def prox_linf(vector, theta):
    """Prox of theta*||.||_inf via its conjugate: x minus the l1-ball projection."""
    if theta < 0:
        raise ValueError(f"prox parameter must be nonnegative, got {theta}")
    v = np.asarray(vector, dtype=float)
    return v - project_l1_ball(v, theta)


def project_l2_ball(vector, center, radius):
    """Projection onto the l2 ball of given center and radius."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    v = np.asarray(vector, dtype=float)
    c = np.broadcast_to(np.asarray(center, dtype=float), v.shape)
    d = v - c
    nrm = float(np.linalg.norm(d))
    if nrm <= radius:
        return v.copy()
    if radius == 0.0:
        return c.copy()
    return c + d * (radius / nrm)


def project_l1_ball(vector, radius):
    """Projection onto {||u||_1 <= radius} by sorting.

    Full sort over the magnitudes, then the largest prefix whose running
    mean overshoot stays below its smallest member fixes the threshold.
    Feasible inputs are returned unchanged (as a copy).
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    v = np.asarray(vector, dtype=float)
    mags = np.abs(v)
    if mags.sum() <= radius:
        return v.copy()
    if radius == 0.0:
        return np.zeros_like(v)
    u = np.sort(mags)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, u.size + 1)
    rho = np.nonzero(u * idx > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.sign(v) * np.maximum(mags - theta, 0.0)


def project_linf_ball(vector, radius):
    """Componentwise clamp to [-radius, radius]."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    return np.clip(np.asarray(vector, dtype=float), -radius, radius)


def project_l1l2_ball(vector, partition, radius):
    """Projection onto the l1/l2 ball: shrink the vector of block norms.

    The block directions are preserved; the block-norm vector is projected
    onto the l1 ball and each block rescaled to its new length.
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    blocks = _as_blocks(vector, partition).copy()
    norms = np.sqrt(np.sum(blocks * blocks, axis=1))
    total = norms.sum()
    if total <= radius:
        return blocks.reshape(-1)
    shrunk = project_l1_ball(norms, radius)
    scale = np.zeros_like(norms)
    nz = norms > 0
    scale[nz] = shrunk[nz] / norms[nz]
    blocks *= scale[:, None]
    return blocks.reshape(-1)


def project_trace_ball(matrix, radius):
    """Projection onto the trace-norm ball: shrink the singular values."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    a = np.asarray(matrix, dtype=float)
    u, sig, vt = np.linalg.svd(a, full_matrices=False)
    if sig.sum() <= radius:
        return a.copy()
    return (u * project_l1_ball(sig, radius)) @ vt


def prox_norm(kind, vector, theta):
    """Prox of theta * (norm named by kind), on flat vectors."""
    if isinstance(kind, L1):
        return prox_l1(vector, theta)
    if isinstance(kind, Linf):
        return prox_linf(vector, theta)
    if isinstance(kind, L1L2):
        return prox_l1l2(vector, kind.partition, theta)
    if isinstance(kind, Trace):
        return prox_trace(_as_matrix(vector, kind.m1, kind.m2), theta).reshape(-1)
    raise TypeError(f"unknown norm kind {kind!r}")


def project_norm_ball(kind, vector, radius):
    """Projection onto {norm <= radius} for the norm named by kind, on flat vectors."""
    if isinstance(kind, L1):
        return project_l1_ball(vector, radius)
    if isinstance(kind, Linf):
        return project_linf_ball(vector, radius)
    if isinstance(kind, L1L2):
        return project_l1l2_ball(vector, kind.partition, radius)
    if isinstance(kind, Trace):
        return project_trace_ball(_as_matrix(vector, kind.m1, kind.m2), radius).reshape(-1)
    raise TypeError(f"unknown norm kind {kind!r}")
