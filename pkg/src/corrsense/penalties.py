"""Penalty parameter rules for the penalized recovery program.

Every rule reduces to lam = t_cor / t_sig for a pair of subdifferential
scalings, one per side; the rules differ in which closed form supplies
the scalings. The returned plan records both scalings so the ratio
identity can always be checked.
"""

import math
from dataclasses import dataclass, field

from .geometry import block_dist_optimal, chi_mean, sparse_dist_optimal
from .structures import BlockSparse, Sparse

RULES = ("sparse", "dense", "opt", "const", "block", "cor4")

# 1 - sqrt(1 - 2/pi), the k = 1 case of the block constant
ALPHA_1 = 1.0 - math.sqrt(1.0 - 2.0 / math.pi)


@dataclass(frozen=True)
class PenaltyPlan:
    rule: str
    lam: float
    t_sig: float
    t_cor: float
    extras: dict = field(default_factory=dict)
    degenerate: bool = False


def _sparse_dims(structure, what):
    if not isinstance(structure, Sparse):
        raise TypeError(f"{what} structure must be sparse for this rule, got {structure!r}")
    if structure.s == 0:
        raise ValueError(f"{what} sparsity must be positive for this rule")
    return structure.s, structure.p


def _opt_scaling(structure, what):
    if isinstance(structure, Sparse):
        if structure.s == 0:
            raise ValueError(f"{what} sparsity must be positive for this rule")
        return sparse_dist_optimal(structure.s, structure.p).scale_t
    if isinstance(structure, BlockSparse):
        if structure.s == 0:
            raise ValueError(f"{what} sparsity must be positive for this rule")
        return block_dist_optimal(structure.s, structure.m, structure.k).scale_t
    raise TypeError(f"no subdifferential scaling for {what} structure {structure!r}")


def penalty_plan(rule, structures, dims=None):
    """Compute the penalty parameter for a (signal, corruption) pair.

    structures is the pair (signal structure, corruption structure); dims
    carries rule-specific extras (epsilon for rule cor4, an explicit
    t_sig override for rule block). Raises ValueError when a rule's logs
    or ratios leave their domain, except the documented cor4 case where
    the sparsity target s_gamma collapses to zero: that returns lam = 0
    flagged as degenerate.
    """
    dims = dict(dims or {})
    sig, cor = structures

    if rule == "sparse":
        s_sig, p = _sparse_dims(sig, "signal")
        s_cor, n = _sparse_dims(cor, "corruption")
        if s_sig >= p or s_cor >= n:
            raise ValueError("sparse rule needs s_sig < p and s_cor < n for positive logs")
        t_sig = math.sqrt(2.0 * math.log(p / s_sig))
        t_cor = math.sqrt(2.0 * math.log(n / s_cor))
        return PenaltyPlan(rule, t_cor / t_sig, t_sig, t_cor)

    if rule == "dense":
        s_sig, p = _sparse_dims(sig, "signal")
        s_cor, n = _sparse_dims(cor, "corruption")
        if s_cor >= n or s_sig >= p:
            raise ValueError("dense rule needs s_sig < p and s_cor < n")
        t_sig = math.sqrt(2.0 / math.pi) * (1.0 - s_sig / p)
        t_cor = math.sqrt(2.0 / math.pi) * (1.0 - s_cor / n)
        return PenaltyPlan(rule, t_cor / t_sig, t_sig, t_cor)

    if rule == "opt":
        t_sig = _opt_scaling(sig, "signal")
        t_cor = _opt_scaling(cor, "corruption")
        if t_sig <= 0:
            raise ValueError(f"signal scaling degenerated to {t_sig}; penalty undefined")
        return PenaltyPlan(rule, t_cor / t_sig, t_sig, t_cor)

    if rule == "const":
        s_sig, p = _sparse_dims(sig, "signal")
        s_cor, n = _sparse_dims(cor, "corruption")
        if s_sig + s_cor >= p + n:
            raise ValueError("const rule needs s_sig + s_cor < p + n")
        t = math.sqrt(2.0 * math.log((p + n) / (s_sig + s_cor)))
        return PenaltyPlan(rule, 1.0, t, t)

    if rule == "block":
        if not isinstance(cor, BlockSparse):
            raise TypeError(f"block rule needs a block-sparse corruption, got {cor!r}")
        k = cor.k
        gamma = cor.s / cor.m
        if gamma >= 1.0:
            raise ValueError("block rule needs corrupted-block fraction below one")
        t_sig = dims.get("t_sig")
        if t_sig is None:
            t_sig = _opt_scaling(sig, "signal")
        if t_sig <= 0:
            raise ValueError(f"signal scaling must be positive, got {t_sig}")
        mu_k = chi_mean(k)
        alpha_k = 1.0 - math.sqrt(1.0 - mu_k * mu_k / k)
        t_cor = mu_k * (1.0 - gamma)
        return PenaltyPlan(
            rule, t_cor / t_sig, t_sig, t_cor, extras={"gamma": gamma, "alpha_k": alpha_k}
        )

    if rule == "cor4":
        s_cor, n = _sparse_dims(cor, "corruption")
        if not isinstance(sig, Sparse):
            raise TypeError(f"cor4 rule needs a sparse signal, got {sig!r}")
        p = sig.p
        gamma = s_cor / n
        if gamma >= 1.0:
            raise ValueError("cor4 rule needs corruption fraction below one")
        eps = float(dims.get("epsilon", 0.0))
        a_gamma = max(ALPHA_1 * (1.0 - gamma) ** 2 - eps, 0.0) ** 2 / 144.0
        extras = {"gamma": gamma, "A_gamma": a_gamma, "alpha_1": ALPHA_1}
        if a_gamma == 0.0:
            extras["s_gamma"] = 0
            return PenaltyPlan(rule, 0.0, math.inf, math.sqrt(2.0 / math.pi) * (1.0 - gamma),
                               extras=extras, degenerate=True)
        ratio = p / (a_gamma * n)
        if ratio <= 1.0:
            raise ValueError(f"cor4 rule needs p > A_gamma * n, got ratio {ratio}")
        s_gamma = math.floor(a_gamma * n / (2.0 * math.log(ratio) + 1.5))
        extras["s_gamma"] = s_gamma
        t_cor = math.sqrt(2.0 / math.pi) * (1.0 - gamma)
        if s_gamma == 0:
            return PenaltyPlan(rule, 0.0, math.inf, t_cor, extras=extras, degenerate=True)
        lam = (1.0 - gamma) / math.sqrt(math.pi * math.log(p / s_gamma))
        t_sig = math.sqrt(2.0 * math.log(p / s_gamma))
        return PenaltyPlan(rule, lam, t_sig, t_cor, extras=extras)

    raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")
