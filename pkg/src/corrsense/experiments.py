"""Phase-transition grids and the stable-error study.

Each grid cell is an independent work unit: its random stream is derived
from (seed, experiment, cell index, rep index), so results do not depend
on scheduling and a run can be resumed or parallelized freely.  Aggregation
happens in fixed cell order, which keeps CSV output byte-identical across
worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .generate import (
    Seed,
    assemble,
    gen_corruption,
    gen_gaussian_matrix,
    gen_noise,
    gen_signal,
)
from .geometry import block_dist_optimal, chi_mean, sparse_dist_optimal
from .penalties import penalty_plan
from .prox import L1, L1L2, Linf, norm_eval
from .solver import (
    CONVERGED,
    Penalized,
    ProgramSpec,
    SignalConstrained,
    SolverConfig,
    solve,
)
from .structures import Binary, BlockPartition, BlockSparse, Sparse

__all__ = [
    "BINARY_SPARSE",
    "SPARSE_SPARSE",
    "SPARSE_BLOCK",
    "SPARSE_PENALIZED",
    "EXPERIMENTS",
    "PHASE_HEADER",
    "THEORY_HEADER",
    "STABLE_HEADER",
    "PHASE_SOLVER",
    "PhaseGridSpec",
    "CellResult",
    "TheoryPoint",
    "StableErrorRecord",
    "run_phase_grid",
    "theory_curve",
    "run_stable_error",
    "stable_cell_margin",
    "phase_csv_row",
    "theory_csv_row",
    "stable_csv_row",
]

BINARY_SPARSE = "binary_sparse_constrained"
SPARSE_SPARSE = "sparse_sparse_constrained"
SPARSE_BLOCK = "sparse_block_constrained"
SPARSE_PENALIZED = "sparse_sparse_penalized"
EXPERIMENTS = (BINARY_SPARSE, SPARSE_SPARSE, SPARSE_BLOCK, SPARSE_PENALIZED)

PHASE_HEADER = "experiment,p,n,m,k,s_sig,s_cor,reps,successes,success_rate,mean_rel_error,status"
THEORY_HEADER = "experiment,abscissa_name,abscissa,ordinate_name,ordinate"
STABLE_HEADER = "p,n,rep,error,rescaled_error"

# Grid solves only need to separate errors around the 1e-3 success cut, so
# the driver default trades tolerance for speed relative to SolverConfig():
# converged cells land near 1e-5 relative error, and hopeless cells stop
# burning iterations sooner.
PHASE_SOLVER = SolverConfig(rho=1.0, tol_abs=1e-5, tol_rel=1e-5, max_iter=6000)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class PhaseGridSpec:
    """One phase-transition experiment over a 2-d cell grid.

    The binary experiment sweeps (n, s_cor); the sparse-signal experiments
    hold n fixed (a singleton n_values) and sweep (s_sig, s_cor).
    """

    experiment: str
    p: int
    n_values: tuple[int, ...]
    s_cor_values: tuple[int, ...]
    s_sig_values: tuple[int, ...] = ()
    m: int | None = None
    k: int | None = None
    lambda_rule: str | None = None
    reps: int = 10
    delta: float = 0.0
    noise_mode: str = "sphere"
    success_tol: float = 1e-3
    seed: int = 0
    solver: SolverConfig = PHASE_SOLVER

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.p < 1:
            raise ValueError("p must be positive")
        if not self.n_values or not self.s_cor_values:
            raise ValueError("grids must be nonempty")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.experiment == BINARY_SPARSE:
            if self.s_sig_values:
                raise ValueError("binary signals take no s_sig grid")
        else:
            if not self.s_sig_values:
                raise ValueError(f"{self.experiment} needs an s_sig grid")
            if len(self.n_values) != 1:
                raise ValueError(f"{self.experiment} runs at a single fixed n")
            if any(s > self.p for s in self.s_sig_values):
                raise ValueError("s_sig exceeds p")
        if self.experiment == SPARSE_BLOCK:
            if self.m is None or self.k is None:
                raise ValueError("block corruption needs m and k")
            if self.m * self.k != self.n_values[0]:
                raise ValueError(f"m*k = {self.m * self.k} must equal n = {self.n_values[0]}")
            if any(s > self.m for s in self.s_cor_values):
                raise ValueError("s_cor exceeds the number of blocks")
        else:
            if any(s > n for s in self.s_cor_values for n in self.n_values):
                raise ValueError("s_cor exceeds n")
        if self.experiment == SPARSE_PENALIZED and self.lambda_rule is None:
            raise ValueError("penalized experiment needs lambda_rule")

    def cells(self) -> list[tuple[int, int | None, int]]:
        """Ordered (n, s_sig, s_cor) coordinates; s_sig is None for binary."""
        if self.experiment == BINARY_SPARSE:
            return [(n, None, sc) for n in self.n_values for sc in self.s_cor_values]
        n = self.n_values[0]
        return [(n, ss, sc) for ss in self.s_sig_values for sc in self.s_cor_values]


@dataclass(frozen=True)
class CellResult:
    experiment: str
    p: int
    n: int
    m: int | None
    k: int | None
    s_sig: int | None
    s_cor: int
    trials: int
    successes: int
    success_rate: float
    mean_rel_error: float
    maxiter_count: int
    sign_successes: int | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.successes <= self.trials):
            raise ValueError("successes out of range")
        if abs(self.success_rate - self.successes / self.trials) > 1e-12:
            raise ValueError("success_rate inconsistent with counts")

    @property
    def status(self) -> str:
        if math.isinf(self.mean_rel_error):
            return "degenerate"
        return "ok" if self.maxiter_count == 0 else f"maxiter:{self.maxiter_count}"


@dataclass(frozen=True)
class TheoryPoint:
    abscissa_name: str
    abscissa: int
    ordinate_name: str
    ordinate: float | None


@dataclass(frozen=True)
class StableErrorRecord:
    p: int
    n: int
    rep: int
    error: float
    rescaled_error: float
    status: str = CONVERGED


def _cell_program(
    spec: PhaseGridSpec, x_star: np.ndarray, s_sig: int | None, s_cor: int, n: int
) -> ProgramSpec | None:
    """Program for one cell; None when the penalty rule degenerates there."""
    if spec.experiment == BINARY_SPARSE:
        return ProgramSpec(SignalConstrained(1.0), Linf(), L1())
    if spec.experiment == SPARSE_SPARSE:
        return ProgramSpec(SignalConstrained(norm_eval(L1(), x_star)), L1(), L1())
    if spec.experiment == SPARSE_BLOCK:
        part = BlockPartition(spec.m, spec.k)
        return ProgramSpec(SignalConstrained(norm_eval(L1(), x_star)), L1(), L1L2(part))
    plan = penalty_plan(spec.lambda_rule, (Sparse(spec.p, s_sig), Sparse(n, s_cor)))
    if plan.degenerate or plan.lam <= 0:
        return None
    return ProgramSpec(Penalized(plan.lam), L1(), L1())


def _run_cell(args: tuple[PhaseGridSpec, int, tuple[int, int | None, int]]) -> CellResult:
    spec, index, (n, s_sig, s_cor) = args
    if spec.experiment == BINARY_SPARSE:
        sig_struct = Binary(spec.p)
    else:
        sig_struct = Sparse(spec.p, s_sig)
    if spec.experiment == SPARSE_BLOCK:
        cor_struct = BlockSparse(spec.m, spec.k, s_cor)
    else:
        cor_struct = Sparse(n, s_cor)

    successes = 0
    maxiter = 0
    sign_successes = 0
    rel_errors = []
    degenerate = False
    for rep in range(spec.reps):
        root = Seed(spec.seed, ((spec.experiment, 0), ("cell", index), ("rep", rep)))
        phi = gen_gaussian_matrix(n, spec.p, root.child("phi"))
        x_star = gen_signal(sig_struct, root.child("signal"))
        v_star = gen_corruption(cor_struct, n, root.child("corruption"))
        z = gen_noise(n, spec.delta, spec.noise_mode, root.child("noise"))
        instance = assemble(phi, x_star, v_star, z, spec.delta)

        program = _cell_program(spec, x_star, s_sig, s_cor, n)
        if program is None:
            degenerate = True
            break
        result = solve(instance, program, spec.solver)
        denom = float(np.linalg.norm(x_star))
        rel = float(np.linalg.norm(result.x_hat - x_star)) / denom if denom > 0 else float(
            np.linalg.norm(result.x_hat)
        )
        rel_errors.append(rel)
        if result.status != CONVERGED:
            maxiter += 1
        elif rel < spec.success_tol:
            successes += 1
        if spec.experiment == BINARY_SPARSE and np.array_equal(
            np.sign(result.x_hat), x_star
        ):
            sign_successes += 1

    if degenerate:
        successes, maxiter, mean_rel = 0, 0, float("inf")
    else:
        mean_rel = float(np.mean(rel_errors))
    return CellResult(
        experiment=spec.experiment,
        p=spec.p,
        n=n,
        m=spec.m,
        k=spec.k,
        s_sig=s_sig,
        s_cor=s_cor,
        trials=spec.reps,
        successes=successes,
        success_rate=successes / spec.reps,
        mean_rel_error=mean_rel,
        maxiter_count=maxiter,
        sign_successes=sign_successes if spec.experiment == BINARY_SPARSE else None,
    )


def _ordered_pool_run(
    worker: Callable,
    payloads: Sequence[tuple],
    threads: int,
    row_callback: Callable | None,
) -> list:
    out = []
    if threads <= 1:
        for pay in payloads:
            res = worker(pay)
            if row_callback is not None:
                row_callback(res)
            out.append(res)
        return out
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map() yields in submission order, so emission stays deterministic
        # no matter which worker finishes first.
        for res in pool.map(worker, payloads, chunksize=1):
            if row_callback is not None:
                row_callback(res)
            out.append(res)
    return out


def run_phase_grid(
    spec: PhaseGridSpec,
    threads: int = 1,
    skip: int = 0,
    row_callback: Callable[[CellResult], None] | None = None,
) -> list[CellResult]:
    """Run every cell of the grid; returns results in cell order.

    ``skip`` drops the first cells (already present in a resumed CSV);
    ``row_callback`` fires per finished cell, in order, for row flushing.
    """
    cells = spec.cells()
    if not 0 <= skip <= len(cells):
        raise ValueError(f"skip must be in [0, {len(cells)}]")
    payloads = [(spec, i, c) for i, c in enumerate(cells)][skip:]
    return _ordered_pool_run(_run_cell, payloads, threads, row_callback)


def _eta_sq_cor(spec: PhaseGridSpec, s: float, n: int) -> float:
    if spec.experiment == SPARSE_BLOCK:
        return block_dist_optimal(s, spec.m, spec.k).value_sq
    return sparse_dist_optimal(s, n).value_sq


def theory_curve(spec: PhaseGridSpec) -> list[TheoryPoint]:
    """Critical s_cor per abscissa value, from the exact-recovery threshold.

    Solves mu_n^2 = eta_sig^2 + eta_cor^2(s) for s by bisection over the
    grid's s_cor range (the right side is increasing in s).  Output is
    resolved to one unit of s; a column whose equation has no root inside
    the range gets ordinate None.
    """
    if spec.experiment not in (BINARY_SPARSE, SPARSE_SPARSE, SPARSE_BLOCK):
        raise ValueError(f"no theory overlay for {spec.experiment}")
    s_lo = float(min(spec.s_cor_values))
    s_hi = float(max(spec.s_cor_values))

    points = []
    if spec.experiment == BINARY_SPARSE:
        columns = [("n", n, n, spec.p / 2.0) for n in spec.n_values]
    else:
        n = spec.n_values[0]
        columns = [
            ("s_sig", ss, n, sparse_dist_optimal(ss, spec.p).value_sq)
            for ss in spec.s_sig_values
        ]
    for name, abscissa, n, eta_sq_sig in columns:
        target = chi_mean(n) ** 2 - eta_sq_sig

        def gap(s: float) -> float:
            return target - _eta_sq_cor(spec, s, n)

        lo, hi = s_lo, s_hi
        ordinate: float | None
        if gap(lo) < 0.0 or gap(hi) > 0.0:
            ordinate = None
        else:
            while hi - lo > 1.0:
                mid = 0.5 * (lo + hi)
                if gap(mid) >= 0.0:
                    lo = mid
                else:
                    hi = mid
            ordinate = 0.5 * (lo + hi)
        points.append(TheoryPoint(name, abscissa, "s_cor", ordinate))
    return points


def _stable_eta_sq(dim: int, s: int) -> float:
    if s == 0:
        return 0.0
    return sparse_dist_optimal(s, dim).value_sq


def stable_cell_margin(p: int, n: int, gamma_sig: float, gamma_cor: float) -> float:
    """mu_n minus the combined complexity radius; > 0 means rescaling is valid."""
    s_sig = _round_half_up(p * gamma_sig)
    s_cor = _round_half_up(n * gamma_cor)
    eta = math.sqrt(_stable_eta_sq(p, s_sig) + _stable_eta_sq(n, s_cor))
    return chi_mean(n) - eta


def _run_stable_unit(args: tuple) -> StableErrorRecord:
    (p, n, gamma_sig, gamma_cor, delta, noise_mode, solver, seed, cell_index, rep) = args
    s_sig = _round_half_up(p * gamma_sig)
    s_cor = _round_half_up(n * gamma_cor)
    root = Seed(seed, (("stable_error", 0), ("cell", cell_index), ("rep", rep)))
    phi = gen_gaussian_matrix(n, p, root.child("phi"))
    x_star = gen_signal(Sparse(p, s_sig), root.child("signal"))
    v_star = gen_corruption(Sparse(n, s_cor), n, root.child("corruption"))
    z = gen_noise(n, delta, noise_mode, root.child("noise"))
    instance = assemble(phi, x_star, v_star, z, delta)

    program = ProgramSpec(SignalConstrained(norm_eval(L1(), x_star)), L1(), L1())
    result = solve(instance, program, solver)
    error = math.sqrt(
        float(np.linalg.norm(result.x_hat - x_star)) ** 2
        + float(np.linalg.norm(result.v_hat - v_star)) ** 2
    )
    eta = math.sqrt(_stable_eta_sq(p, s_sig) + _stable_eta_sq(n, s_cor))
    rescaled = error * (chi_mean(n) - eta) / math.sqrt(n)
    return StableErrorRecord(p, n, rep, error, rescaled, result.status)


def run_stable_error(
    p_values: Sequence[int],
    n_values: Sequence[int],
    gamma_sig: float = 0.01,
    gamma_cor: float = 0.4,
    delta: float = 1.0,
    reps: int = 20,
    seed: int = 0,
    noise_mode: str = "sphere",
    solver: SolverConfig = PHASE_SOLVER,
    threads: int = 1,
    skip: int = 0,
    row_callback: Callable[[StableErrorRecord], None] | None = None,
) -> list[StableErrorRecord]:
    """Joint recovery error and its rescaling, one record per (p, n, rep).

    Cells whose complexity radius reaches mu_n (rescaling factor <= 0) are
    excluded from the output; their cell indices are still reserved so seeds
    do not shift when the grid mixes valid and excluded cells.
    """
    if not (0 < gamma_sig < 1 and 0 < gamma_cor < 1):
        raise ValueError("sparsity fractions must lie in (0, 1)")
    if not p_values or not n_values:
        raise ValueError("grids must be nonempty")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if delta < 0:
        raise ValueError("delta must be nonnegative")

    payloads = []
    cell_index = 0
    for p in p_values:
        for n in n_values:
            if stable_cell_margin(p, n, gamma_sig, gamma_cor) > 0.0:
                for rep in range(reps):
                    payloads.append(
                        (p, n, gamma_sig, gamma_cor, delta, noise_mode,
                         solver, seed, cell_index, rep)
                    )
            cell_index += 1
    if not 0 <= skip <= len(payloads):
        raise ValueError(f"skip must be in [0, {len(payloads)}]")
    return _ordered_pool_run(_run_stable_unit, payloads[skip:], threads, row_callback)


def _g9(x: float) -> str:
    return "%.9g" % x


def _opt(value) -> str:
    return "" if value is None else str(value)


def phase_csv_row(r: CellResult) -> str:
    return ",".join(
        [
            r.experiment,
            str(r.p),
            str(r.n),
            _opt(r.m),
            _opt(r.k),
            _opt(r.s_sig),
            str(r.s_cor),
            str(r.trials),
            str(r.successes),
            _g9(r.success_rate),
            _g9(r.mean_rel_error),
            r.status,
        ]
    )


def theory_csv_row(experiment: str, point: TheoryPoint) -> str:
    ordinate = "" if point.ordinate is None else _g9(point.ordinate)
    return ",".join(
        [experiment, point.abscissa_name, str(point.abscissa), point.ordinate_name, ordinate]
    )


def stable_csv_row(rec: StableErrorRecord) -> str:
    return ",".join(
        [str(rec.p), str(rec.n), str(rec.rep), _g9(rec.error), _g9(rec.rescaled_error)]
    )
