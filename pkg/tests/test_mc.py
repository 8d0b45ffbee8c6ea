"""Monte Carlo complexity estimates against closed-form bounds."""

import numpy as np
import pytest

from corrsense import (
    Binary,
    BlockSparse,
    LowRank,
    Seed,
    Sparse,
    mc_complexity,
    prop2_gap,
    sparse_dist_optimal,
)
from corrsense.generate import normals


def test_sparse_estimate_below_optimized_bound():
    est = mc_complexity(Sparse(1000, 100), None, 2000, Seed(1))
    bound = sparse_dist_optimal(100, 1000).value_sq
    assert est.value_sq <= bound + 3.0 * est.std_error
    # the bound is tight for sparse structures, so the estimate should
    # also land within a few percent rather than far below
    assert est.value_sq >= 0.8 * bound


def test_binary_estimate_is_half_dimension():
    est = mc_complexity(Binary(1000), None, 2000, Seed(2))
    assert est.value_sq <= 500.0 + 3.0 * est.std_error
    assert est.value_sq >= 500.0 - 3.0 * est.std_error - 1.0


def test_exemplar_invariance():
    cases = [
        Sparse(400, 40),
        BlockSparse(60, 5, 12),
        Binary(400),
        LowRank(12, 9, 3),
    ]
    for structure in cases:
        a = mc_complexity(structure, None, 1500, Seed(3))
        b = mc_complexity(structure, Seed(99), 1500, Seed(4))
        gap = abs(a.value_sq - b.value_sq)
        sigma = np.hypot(a.std_error, b.std_error)
        assert gap <= 4.0 * sigma, f"{structure}: gap {gap} vs sigma {sigma}"


def test_determinism():
    a = mc_complexity(Sparse(200, 20), Seed(5), 300, Seed(6))
    b = mc_complexity(Sparse(200, 20), Seed(5), 300, Seed(6))
    assert a.value_sq == b.value_sq and a.std_error == b.std_error
    c = mc_complexity(Sparse(200, 20), Seed(5), 300, Seed(7))
    assert c.value_sq != a.value_sq


def test_sample_floor():
    with pytest.raises(ValueError):
        mc_complexity(Sparse(100, 10), None, 99, Seed(0))
    with pytest.raises(ValueError):
        mc_complexity(LowRank(4, 4, 0), None, 200, Seed(0))


def test_prop2_gap_values():
    assert prop2_gap(Sparse(1000, 100)) == pytest.approx(6.3245553203367587, rel=1e-12)
    assert prop2_gap(Sparse(77, 77)) == pytest.approx(2.0, rel=1e-12)
    assert prop2_gap(BlockSparse(100, 10, 100)) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        prop2_gap(Sparse(100, 0))


def test_additive_slack_inequalities():
    # the optimized closed form must stay within the proven slack of the
    # sampled complexity, on both the sqrt and the squared scale
    structure = Sparse(1000, 50)
    est = mc_complexity(structure, None, 2000, Seed(8))
    opt = sparse_dist_optimal(50, 1000).value_sq
    assert np.sqrt(opt) <= np.sqrt(est.value_sq + 3.0 * est.std_error) + 6.0
    assert opt <= est.value_sq + 3.0 * est.std_error + prop2_gap(structure)


def test_nuclear_norm_mean_floor():
    draws = 250
    vals = np.empty(draws)
    for i in range(draws):
        g = normals(Seed(9).child("draw", i), 600).reshape(30, 20)
        vals[i] = np.linalg.svd(g, compute_uv=False).sum()
    se = vals.std(ddof=1) / np.sqrt(draws)
    floor = (4.0 / 27.0) * 20.0 * np.sqrt(30.0)
    assert floor == pytest.approx(16.228816518671589, rel=1e-12)
    assert vals.mean() >= floor - 3.0 * se
