"""Corrupted sensing toolkit.

Recovery of a structured signal x and a structured corruption v from
observations y = phi x + v + z with bounded noise: geometric complexity
bounds and sample-size thresholds, the three convex recovery programs
solved by operator splitting, deterministic instance generation, and the
phase-transition / stable-error experiment harness behind the corrsense
command-line tool.
"""

from .experiments import (
    BINARY_SPARSE,
    EXPERIMENTS,
    PHASE_HEADER,
    PHASE_SOLVER,
    SPARSE_BLOCK,
    SPARSE_PENALIZED,
    SPARSE_SPARSE,
    STABLE_HEADER,
    THEORY_HEADER,
    CellResult,
    PhaseGridSpec,
    StableErrorRecord,
    TheoryPoint,
    phase_csv_row,
    run_phase_grid,
    run_stable_error,
    stable_cell_margin,
    stable_csv_row,
    theory_csv_row,
    theory_curve,
)
from .geometry import (
    ComplexityEstimate,
    RecoveryThreshold,
    binary_bound,
    block_bound_new,
    block_bound_prior,
    block_dist_exact,
    block_dist_optimal,
    chi_mean,
    constrained_threshold,
    eta_sq_optimal,
    lowrank_bounds,
    penalized_threshold,
    prop2_gap,
    recovery_threshold,
    sparse_bound_new,
    sparse_bound_prior,
    sparse_dist_exact,
    sparse_dist_optimal,
    success_probability,
)
from .generate import Seed, assemble, gen_corruption, gen_gaussian_matrix, gen_noise, gen_signal
from .mc import mc_complexity
from .penalties import PenaltyPlan, penalty_plan
from .prox import (
    L1,
    L1L2,
    Linf,
    Trace,
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
from .solver import (
    CONVERGED,
    MAX_ITER,
    CorruptionConstrained,
    FeasibilityReport,
    Penalized,
    ProblemInstance,
    ProgramSpec,
    SignalConstrained,
    SolverConfig,
    SolverResult,
    check_feasibility,
    solve,
)
from .heatmap import render_heatmap_svg
from .instance_io import (
    InstanceFormatError,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)
from .structures import Binary, BlockPartition, BlockSparse, LowRank, Sparse, StructureSpec

__version__ = "0.1.0"
