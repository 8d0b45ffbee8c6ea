"""Deterministic, seed-addressed generation of problem instances.

Every random object is produced from a Seed: a 64-bit master value plus a
path of (label, index) pairs naming where in an experiment the draw
happens. The seed is hashed to a 128-bit key for a counter-based Philox
stream, so draw i of a given seed is a pure function of (master, path, i).
Two consequences the rest of the package relies on:

* identical seeds give bitwise-identical output on every run, regardless
  of thread count or call order, because nothing shares generator state;
* distinct path labels give statistically independent streams.

Normal variates come from the inverse normal CDF applied to uniforms built
from one 64-bit counter word each. Pairing transforms (Box-Muller style)
are deliberately avoided: they tie consecutive counters together and break
the one-word-one-variate mapping.
"""

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .structures import Binary, BlockSparse, LowRank, Sparse

_MASTER_MAX = 2**64


@dataclass(frozen=True)
class Seed:
    """Master value plus a path of (label, index) pairs."""

    master: int
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= self.master < _MASTER_MAX:
            raise ValueError(f"master seed must be a 64-bit unsigned integer, got {self.master}")

    def child(self, label, index=0):
        """Seed for the sub-stream named (label, index)."""
        return Seed(self.master, self.path + ((str(label), int(index)),))

    def key128(self):
        """128-bit Philox key derived by hashing master and path."""
        h = hashlib.sha256()
        h.update(struct.pack(">Q", self.master))
        for label, index in self.path:
            h.update(label.encode("utf-8"))
            h.update(b"\x00")
            h.update(struct.pack(">q", index))
        return int.from_bytes(h.digest()[:16], "big")


def _as_seed(seed):
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))


def uniforms(seed, count):
    """count uniforms on the open interval (0, 1), one counter word each."""
    raw = np.random.Philox(key=_as_seed(seed).key128()).random_raw(count)
    return ((raw >> np.uint64(11)) + 0.5) * 2.0**-53


def normals(seed, count):
    """count standard normal variates via the inverse CDF."""
    return ndtri(uniforms(seed, count))


def _choose_without_replacement(count, total, seed):
    rng = np.random.Generator(np.random.Philox(key=_as_seed(seed).key128()))
    return np.sort(rng.permutation(total)[:count])


def gen_gaussian_matrix(n, p, seed):
    """n x p matrix with independent N(0, 1/n) entries.

    Entry (i, j) comes from counter i*p + j of the seed's stream, so the
    matrix is a pure function of (seed, n, p) with no layout dependence.
    """
    if n < 1 or p < 1:
        raise ValueError(f"dimensions must be positive, got n={n}, p={p}")
    return normals(seed, n * p).reshape(n, p) / np.sqrt(n)


def gen_signal(structure, seed):
    """Draw a member of the structure class.

    Sparse: uniformly random support, standard normal entries. Block
    sparse: uniformly random active blocks, standard normal entries
    inside. Binary: independent uniform +-1. Low rank: A @ B.T with
    standard normal factors, flattened row-major.
    """
    seed = _as_seed(seed)
    if isinstance(structure, Sparse):
        x = np.zeros(structure.p)
        if structure.s > 0:
            supp = _choose_without_replacement(structure.s, structure.p, seed.child("support"))
            x[supp] = normals(seed.child("values"), structure.s)
        return x
    if isinstance(structure, BlockSparse):
        blocks = np.zeros((structure.m, structure.k))
        if structure.s > 0:
            active = _choose_without_replacement(structure.s, structure.m, seed.child("support"))
            vals = normals(seed.child("values"), structure.s * structure.k)
            blocks[active] = vals.reshape(structure.s, structure.k)
        return blocks.reshape(-1)
    if isinstance(structure, Binary):
        u = uniforms(seed.child("values"), structure.p)
        return np.where(u < 0.5, -1.0, 1.0)
    if isinstance(structure, LowRank):
        if structure.r == 0:
            return np.zeros(structure.m1 * structure.m2)
        a = normals(seed.child("left"), structure.m1 * structure.r).reshape(structure.m1, structure.r)
        b = normals(seed.child("right"), structure.m2 * structure.r).reshape(structure.m2, structure.r)
        return (a @ b.T).reshape(-1)
    raise TypeError(f"unsupported structure {structure!r}")


def gen_corruption(structure, n, seed):
    """Draw a corruption vector; the structure's ambient dimension must be n."""
    if structure.dim != n:
        raise ValueError(
            f"corruption structure has ambient dimension {structure.dim}, expected n={n}"
        )
    return gen_signal(structure, seed)


def gen_noise(n, delta, mode, seed):
    """Noise of norm at most delta: mode 'none' is zero, 'sphere' has norm exactly delta."""
    if delta < 0:
        raise ValueError(f"noise level must be nonnegative, got {delta}")
    if mode == "none":
        return np.zeros(n)
    if mode == "sphere":
        if delta == 0.0:
            return np.zeros(n)
        g = normals(seed, n)
        return delta * g / np.linalg.norm(g)
    raise ValueError(f"unknown noise mode {mode!r}")


def assemble(phi, x_star, v_star, z, delta):
    """Build a ProblemInstance with y = phi @ x_star + v_star + z."""
    from .solver import ProblemInstance

    phi = np.asarray(phi, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    z = np.asarray(z, dtype=float)
    n, p = phi.shape
    if x_star.shape != (p,) or v_star.shape != (n,) or z.shape != (n,):
        raise ValueError(
            f"inconsistent shapes: phi {phi.shape}, x {x_star.shape}, v {v_star.shape}, z {z.shape}"
        )
    if np.linalg.norm(z) > delta * (1.0 + 1e-12):
        raise ValueError(f"noise norm {np.linalg.norm(z)} exceeds delta={delta}")
    y = phi @ x_star + v_star + z
    return ProblemInstance(phi=phi, y=y, delta=float(delta), x_star=x_star, v_star=v_star, z=z)
