"""Structured vector classes and the block partition they share.

A structure describes which low-dimensional family a vector belongs to:
sparse (few nonzero entries), block-sparse (few active blocks of a fixed
contiguous partition), low-rank (matrix stored flattened row-major), or
binary (all entries +-1). Geometry code computes complexity bounds from
these descriptions; generators draw members of the class.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous equal-size partition of [0, m*k) into m blocks of k."""

    m: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError(f"need m >= 1 and k >= 1, got m={self.m}, k={self.k}")

    @property
    def dim(self):
        return self.m * self.k

    def block_of(self, i):
        """Block index of ambient coordinate i."""
        if not 0 <= i < self.dim:
            raise ValueError(f"index {i} outside [0, {self.dim})")
        return i // self.k


@dataclass(frozen=True)
class Sparse:
    p: int
    s: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"ambient dimension must be positive, got p={self.p}")
        if not 0 <= self.s <= self.p:
            raise ValueError(f"need 0 <= s <= p, got s={self.s}, p={self.p}")

    @property
    def dim(self):
        return self.p


@dataclass(frozen=True)
class BlockSparse:
    m: int
    k: int
    s: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError(f"need m >= 1 and k >= 1, got m={self.m}, k={self.k}")
        if not 0 <= self.s <= self.m:
            raise ValueError(f"need 0 <= s <= m, got s={self.s}, m={self.m}")

    @property
    def dim(self):
        return self.m * self.k

    @property
    def partition(self):
        return BlockPartition(self.m, self.k)


@dataclass(frozen=True)
class LowRank:
    """Rank-r matrices of shape m1 x m2 with m1 >= m2, stored row-major."""

    m1: int
    m2: int
    r: int

    def __post_init__(self):
        if not self.m1 >= self.m2 >= self.r >= 0:
            raise ValueError(
                f"need m1 >= m2 >= r >= 0, got m1={self.m1}, m2={self.m2}, r={self.r}"
            )
        if self.m2 < 1:
            raise ValueError(f"matrix dimensions must be positive, got m2={self.m2}")

    @property
    def dim(self):
        return self.m1 * self.m2


@dataclass(frozen=True)
class Binary:
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"ambient dimension must be positive, got p={self.p}")

    @property
    def dim(self):
        return self.p


# any of the four classes above
StructureSpec = Sparse | BlockSparse | LowRank | Binary
