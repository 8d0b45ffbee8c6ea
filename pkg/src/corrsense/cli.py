"""Command-line front end: bounds, single solves, and experiment runs.

Exit codes: 0 on success, 2 for usage or malformed input, 3 when the
solver stops at its iteration cap, 4 for I/O problems.  Long runs flush
one CSV row at a time and can be continued with --resume.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (
    BINARY_SPARSE,
    EXPERIMENTS,
    PHASE_HEADER,
    PHASE_SOLVER,
    SPARSE_BLOCK,
    SPARSE_PENALIZED,
    STABLE_HEADER,
    THEORY_HEADER,
    CellResult,
    PhaseGridSpec,
    StableErrorRecord,
    phase_csv_row,
    run_phase_grid,
    run_stable_error,
    stable_cell_margin,
    stable_csv_row,
    theory_csv_row,
    theory_curve,
)
from .geometry import (
    binary_bound,
    block_bound_new,
    block_bound_prior,
    block_dist_optimal,
    lowrank_bounds,
    sparse_bound_new,
    sparse_bound_prior,
    sparse_dist_optimal,
)
from .heatmap import render_heatmap_svg
from .instance_io import InstanceFormatError, read_instance, write_solution
from .mc import mc_complexity
from .prox import L1, L1L2, Linf, Trace
from .solver import (
    CONVERGED,
    CorruptionConstrained,
    Penalized,
    ProgramSpec,
    SignalConstrained,
    SolverConfig,
    solve,
)
from .structures import Binary, BlockPartition, BlockSparse, LowRank, Sparse

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_NUM = "%.17g"


def _ints_arg(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def _ints_cast(text: str) -> tuple[int, ...]:
    values = tuple(int(tok) for tok in text.replace(",", " ").split())
    if not values:
        raise ValueError("empty integer list")
    return values


def _load_config(path: str) -> dict[str, str]:
    data: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
    return data


class _Settings:
    """Flag values override config-file values override hard defaults."""

    def __init__(self, args: argparse.Namespace, casts: dict[str, object]):
        self.args = args
        self.casts = casts
        self.config: dict[str, str] = {}
        if getattr(args, "config", None):
            self.config = _load_config(args.config)
            unknown = sorted(set(self.config) - set(casts))
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(unknown)}")

    def get(self, name, default=None, required=False):
        value = getattr(self.args, name, None)
        if value is None and name in self.config:
            value = self.casts[name](self.config[name])
        if value is None:
            if required:
                raise ValueError(f"missing required setting: {name}")
            return default
        return value


def _build_structure(args: argparse.Namespace):
    kind = args.structure

    def need(*names):
        missing = [n for n in names if getattr(args, n) is None]
        if missing:
            raise ValueError(
                f"structure {kind!r} needs --" + ", --".join(missing).replace("_", "-")
            )

    if kind == "sparse":
        need("p", "s")
        return Sparse(args.p, args.s)
    if kind == "block":
        need("m", "k", "s")
        return BlockSparse(args.m, args.k, args.s)
    if kind == "lowrank":
        need("m1", "m2", "r")
        return LowRank(args.m1, args.m2, args.r)
    if kind == "binary":
        need("p")
        return Binary(args.p)
    raise ValueError(f"unknown structure {kind!r}")


def _bounds_lines(args: argparse.Namespace) -> list[tuple[str, float]]:
    structure = _build_structure(args)
    if getattr(structure, "s", None) == 0:
        raise ValueError(
            "s=0 is the empty structure: only the zero vector fits, recovery is "
            "trivial, and no bound scaling is defined; use s >= 1"
        )
    lines: list[tuple[str, float]] = []
    if isinstance(structure, Sparse):
        prior = sparse_bound_prior(structure.s, structure.p)
        new = sparse_bound_new(structure.s, structure.p)
        opt = sparse_dist_optimal(structure.s, structure.p)
    elif isinstance(structure, BlockSparse):
        prior = block_bound_prior(structure.s, structure.m, structure.k)
        new = block_bound_new(structure.s, structure.m, structure.k)
        opt = block_dist_optimal(structure.s, structure.m, structure.k)
    elif isinstance(structure, LowRank):
        prior, new = lowrank_bounds(structure.r, structure.m1, structure.m2)
        opt = new if new.value_sq <= prior.value_sq else prior
    else:
        est = binary_bound(structure.p)
        lines.append(("eta_sq_prior", est.value_sq))
        lines.append(("eta_sq_opt", est.value_sq))
        return lines
    lines.append(("eta_sq_prior", prior.value_sq))
    lines.append(("eta_sq_new", new.value_sq))
    lines.append(("eta_sq_opt", opt.value_sq))
    for label, est in (("t_prior", prior), ("t_new", new), ("t_opt", opt)):
        if est.scale_t is not None:
            lines.append((label, est.scale_t))
    return lines


def cmd_bounds(args: argparse.Namespace) -> int:
    for name, value in _bounds_lines(args):
        print(f"{name}={_NUM % value}")
    if args.mc is not None:
        if args.seed is None:
            raise ValueError("--mc needs --seed for a reproducible estimate")
        est = mc_complexity(_build_structure(args), args.exemplar_seed, args.mc, args.seed)
        print(f"mc_mean={_NUM % est.value_sq}")
        print(f"mc_se={_NUM % est.std_error}")
    return EXIT_OK


def cmd_mc(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise ValueError("mc-complexity needs --seed")
    est = mc_complexity(_build_structure(args), args.exemplar_seed, args.samples, args.seed)
    print(f"mc_mean={_NUM % est.value_sq}")
    print(f"mc_se={_NUM % est.std_error}")
    print(f"samples={est.samples}")
    return EXIT_OK


def _parse_norm(text: str, dim: int, role: str):
    base, _, rest = text.partition(":")
    if base == "l1" and not rest:
        return L1()
    if base == "linf" and not rest:
        return Linf()
    if base == "l1l2":
        try:
            k = int(rest)
        except ValueError:
            raise ValueError(f"{role} norm l1l2 needs a block size, e.g. l1l2:10")
        if k < 1 or dim % k != 0:
            raise ValueError(f"{role} dimension {dim} is not a multiple of block size {k}")
        return L1L2(BlockPartition(dim // k, k))
    if base == "trace":
        try:
            m1_txt, m2_txt = rest.split(",")
            m1, m2 = int(m1_txt), int(m2_txt)
        except ValueError:
            raise ValueError(f"{role} norm trace needs shape, e.g. trace:30,20")
        if m1 * m2 != dim:
            raise ValueError(f"trace shape {m1}x{m2} does not match {role} dimension {dim}")
        return Trace(m1, m2)
    raise ValueError(f"unknown {role} norm {text!r}")


def cmd_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    signal_norm = _parse_norm(args.signal_norm, instance.p, "signal")
    corruption_norm = _parse_norm(args.corruption_norm, instance.n, "corruption")

    if args.program == "penalized":
        if args.lam is None:
            raise ValueError("penalized program needs --lam")
        if args.bound is not None:
            raise ValueError("--bound does not apply to the penalized program")
        program = Penalized(args.lam)
    else:
        if args.bound is None:
            raise ValueError(f"{args.program} program needs --bound")
        if args.lam is not None:
            raise ValueError("--lam applies only to the penalized program")
        program = (
            SignalConstrained(args.bound)
            if args.program == "signal"
            else CorruptionConstrained(args.bound)
        )

    config = SolverConfig(
        rho=args.rho, tol_abs=args.tol_abs, tol_rel=args.tol_rel, max_iter=args.max_iter
    )
    result = solve(instance, ProgramSpec(program, signal_norm, corruption_norm), config)

    out = args.out if args.out else args.instance + ".sol"
    write_solution(out, result)
    print(f"objective={_NUM % result.objective}")
    print(f"primal_residual={_NUM % result.primal_residual}")
    print(f"dual_residual={_NUM % result.dual_residual}")
    print(f"iterations={result.iterations}")
    print(f"status={result.status}")
    return EXIT_OK if result.status == CONVERGED else EXIT_SOLVER


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    full = os.path.abspath(path)
    parent = os.path.dirname(full) or "."
    if not os.path.isdir(parent):
        raise OSError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise OSError(f"output directory is not writable: {parent}")
    if os.path.exists(full) and not os.access(full, os.W_OK):
        raise OSError(f"output path is not writable: {full}")


_PHASE_CASTS = {
    "experiment": str,
    "p": int,
    "n": int,
    "n_values": _ints_cast,
    "s_sig_values": _ints_cast,
    "s_cor_values": _ints_cast,
    "m": int,
    "k": int,
    "lambda_rule": str,
    "reps": int,
    "delta": float,
    "noise_mode": str,
    "success_tol": float,
    "seed": int,
    "threads": int,
    "out": str,
    "theory_out": str,
    "svg": str,
    "rho": float,
    "tol_abs": float,
    "tol_rel": float,
    "max_iter": int,
}

_STABLE_CASTS = {
    "p_values": _ints_cast,
    "n_values": _ints_cast,
    "gamma_sig": float,
    "gamma_cor": float,
    "delta": float,
    "reps": int,
    "noise_mode": str,
    "seed": int,
    "threads": int,
    "out": str,
    "rho": float,
    "tol_abs": float,
    "tol_rel": float,
    "max_iter": int,
}


def _solver_from(settings: _Settings, base: SolverConfig) -> SolverConfig:
    return SolverConfig(
        rho=settings.get("rho", base.rho),
        tol_abs=settings.get("tol_abs", base.tol_abs),
        tol_rel=settings.get("tol_rel", base.tol_rel),
        max_iter=settings.get("max_iter", base.max_iter),
    )


def _phase_spec(settings: _Settings) -> PhaseGridSpec:
    experiment = settings.get("experiment", required=True)
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    n = settings.get("n")
    n_values = settings.get("n_values")
    if n is not None and n_values is not None:
        raise ValueError("give either n or n_values, not both")
    if n is not None:
        n_values = (n,)
    m = settings.get("m")
    k = settings.get("k")
    if n_values is None and experiment == SPARSE_BLOCK and m is not None and k is not None:
        n_values = (m * k,)
    if n_values is None:
        raise ValueError("missing required setting: n or n_values")
    return PhaseGridSpec(
        experiment=experiment,
        p=settings.get("p", required=True),
        n_values=tuple(n_values),
        s_cor_values=tuple(settings.get("s_cor_values", required=True)),
        s_sig_values=tuple(settings.get("s_sig_values", ())),
        m=m,
        k=k,
        lambda_rule=settings.get("lambda_rule"),
        reps=settings.get("reps", 10),
        delta=settings.get("delta", 0.0),
        noise_mode=settings.get("noise_mode", "sphere"),
        success_tol=settings.get("success_tol", 1e-3),
        seed=settings.get("seed", 0),
        solver=_solver_from(settings, PHASE_SOLVER),
    )


def _parse_phase_row(line: str, spec: PhaseGridSpec, cell) -> CellResult | None:
    """Strict parse of one phase CSV row; None when the line is malformed."""
    parts = line.split(",")
    if len(parts) != 12:
        return None
    exp, p_s, n_s, m_s, k_s, ss_s, sc_s, reps_s, succ_s, _rate, mre_s, status = parts
    try:
        p, n, s_cor, reps, succ = int(p_s), int(n_s), int(sc_s), int(reps_s), int(succ_s)
        s_sig = int(ss_s) if ss_s else None
        m = int(m_s) if m_s else None
        k = int(k_s) if k_s else None
        mre = float(mre_s)
    except ValueError:
        return None
    if status == "degenerate":
        maxiter = 0
    elif status == "ok":
        maxiter = 0
    elif status.startswith("maxiter:"):
        try:
            maxiter = int(status.split(":", 1)[1])
        except ValueError:
            return None
    else:
        return None
    row_coords = (exp, p, reps, n, s_sig, s_cor, m, k)
    want = (spec.experiment, spec.p, spec.reps, cell[0], cell[1], cell[2], spec.m, spec.k)
    if row_coords != want:
        raise ValueError(
            "cannot resume: existing rows do not match the requested grid "
            f"(found {row_coords}, expected {want})"
        )
    return CellResult(
        experiment=exp,
        p=p,
        n=n,
        m=m,
        k=k,
        s_sig=s_sig,
        s_cor=s_cor,
        trials=reps,
        successes=succ,
        success_rate=succ / reps,
        mean_rel_error=mre,
        maxiter_count=maxiter,
        sign_successes=None,
    )


def _resume_rows(path: str, header: str, expected_len: int, parse_one):
    """Salvage the valid row prefix of a partial CSV.

    Returns (parsed rows, kept lines).  A malformed trailing line (an
    interrupted write) is dropped; a well-formed line that contradicts the
    requested grid raises instead, since that file belongs to another run.
    """
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != header:
        raise ValueError(f"cannot resume: {path} lacks the expected header")
    parsed = []
    kept = [header]
    for line in lines[1:]:
        if len(parsed) >= expected_len:
            raise ValueError(f"cannot resume: {path} has more rows than the requested grid")
        row = parse_one(line, len(parsed))
        if row is None:
            break
        parsed.append(row)
        kept.append(line)
    return parsed, kept


def cmd_phase(args: argparse.Namespace) -> int:
    settings = _Settings(args, _PHASE_CASTS)
    spec = _phase_spec(settings)
    out = settings.get("out", required=True)
    theory_out = settings.get("theory_out")
    svg_out = settings.get("svg")
    threads = settings.get("threads", 1)
    constrained = spec.experiment != SPARSE_PENALIZED
    if theory_out is not None and not constrained:
        raise ValueError("penalized runs have no theory overlay; drop --theory-out")
    for path in (out, theory_out, svg_out):
        _check_writable(path)

    cells = spec.cells()
    prior: list[CellResult] = []
    if args.resume and os.path.exists(out):
        prior, kept = _resume_rows(
            out,
            PHASE_HEADER,
            len(cells),
            lambda line, i: _parse_phase_row(line, spec, cells[i]),
        )
        with open(out, "w") as fh:
            fh.write("\n".join(kept) + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(PHASE_HEADER + "\n")

    with open(out, "a") as fh:

        def emit(row: CellResult) -> None:
            fh.write(phase_csv_row(row) + "\n")
            fh.flush()

        fresh = run_phase_grid(spec, threads=threads, skip=len(prior), row_callback=emit)
    results = prior + fresh

    theory = theory_curve(spec) if constrained else None
    if theory_out is not None:
        rows = [THEORY_HEADER] + [theory_csv_row(spec.experiment, pt) for pt in theory]
        with open(theory_out, "w") as fh:
            fh.write("\n".join(rows) + "\n")
    if svg_out is not None:
        with open(svg_out, "w") as fh:
            fh.write(render_heatmap_svg(results, theory))
    print(f"phase: {len(results)} cells -> {out}")
    return EXIT_OK


def _parse_stable_row(line: str, expected: tuple[int, int, int]) -> StableErrorRecord | None:
    parts = line.split(",")
    if len(parts) != 5:
        return None
    try:
        p, n, rep = int(parts[0]), int(parts[1]), int(parts[2])
        error, rescaled = float(parts[3]), float(parts[4])
    except ValueError:
        return None
    if (p, n, rep) != expected:
        raise ValueError(
            "cannot resume: existing rows do not match the requested grid "
            f"(found {(p, n, rep)}, expected {expected})"
        )
    return StableErrorRecord(p, n, rep, error, rescaled)


def cmd_stable(args: argparse.Namespace) -> int:
    settings = _Settings(args, _STABLE_CASTS)
    p_values = tuple(settings.get("p_values", required=True))
    n_values = tuple(settings.get("n_values", required=True))
    gamma_sig = settings.get("gamma_sig", 0.01)
    gamma_cor = settings.get("gamma_cor", 0.4)
    delta = settings.get("delta", 1.0)
    reps = settings.get("reps", 20)
    seed = settings.get("seed", 0)
    noise_mode = settings.get("noise_mode", "sphere")
    threads = settings.get("threads", 1)
    out = settings.get("out", required=True)
    solver = _solver_from(settings, PHASE_SOLVER)
    _check_writable(out)

    expected: list[tuple[int, int, int]] = []
    for p in p_values:
        for n in n_values:
            if stable_cell_margin(p, n, gamma_sig, gamma_cor) > 0.0:
                expected.extend((p, n, rep) for rep in range(reps))
            else:
                print(
                    f"note: cell p={p} n={n} is below the recovery threshold; excluded",
                    file=sys.stderr,
                )

    prior: list[StableErrorRecord] = []
    if args.resume and os.path.exists(out):
        prior, kept = _resume_rows(
            out,
            STABLE_HEADER,
            len(expected),
            lambda line, i: _parse_stable_row(line, expected[i]),
        )
        with open(out, "w") as fh:
            fh.write("\n".join(kept) + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(STABLE_HEADER + "\n")

    with open(out, "a") as fh:

        def emit(rec: StableErrorRecord) -> None:
            fh.write(stable_csv_row(rec) + "\n")
            fh.flush()

        fresh = run_stable_error(
            p_values,
            n_values,
            gamma_sig=gamma_sig,
            gamma_cor=gamma_cor,
            delta=delta,
            reps=reps,
            seed=seed,
            noise_mode=noise_mode,
            solver=solver,
            threads=threads,
            skip=len(prior),
            row_callback=emit,
        )
    print(f"stable: {len(prior) + len(fresh)} rows -> {out}")
    return EXIT_OK


def _add_structure_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--structure", required=True, choices=["sparse", "block", "lowrank", "binary"]
    )
    sub.add_argument("--p", type=int)
    sub.add_argument("--s", type=int)
    sub.add_argument("--m", type=int)
    sub.add_argument("--k", type=int)
    sub.add_argument("--m1", type=int)
    sub.add_argument("--m2", type=int)
    sub.add_argument("--r", type=int)


def _add_solver_flags(sub: argparse.ArgumentParser, defaults: SolverConfig | None) -> None:
    if defaults is None:
        sub.add_argument("--rho", type=float)
        sub.add_argument("--tol-abs", type=float)
        sub.add_argument("--tol-rel", type=float)
        sub.add_argument("--max-iter", type=int)
    else:
        sub.add_argument("--rho", type=float, default=defaults.rho)
        sub.add_argument("--tol-abs", type=float, default=defaults.tol_abs)
        sub.add_argument("--tol-rel", type=float, default=defaults.tol_rel)
        sub.add_argument("--max-iter", type=int, default=defaults.max_iter)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrsense",
        description="Recovery thresholds, solvers, and experiments for corrupted sensing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="tangent-cone complexity bounds for a structure")
    _add_structure_flags(b)
    b.add_argument("--mc", type=int, help="Monte-Carlo sample count for a sampled check")
    b.add_argument("--seed", type=int)
    b.add_argument("--exemplar-seed", type=int, help="randomize the representative point")
    b.set_defaults(func=cmd_bounds)

    mc = sub.add_parser("mc-complexity", help="Monte-Carlo distance estimate for a structure")
    _add_structure_flags(mc)
    mc.add_argument("--samples", type=int, default=2000)
    mc.add_argument("--seed", type=int)
    mc.add_argument("--exemplar-seed", type=int)
    mc.set_defaults(func=cmd_mc)

    sv = sub.add_parser("solve", help="solve one instance file")
    sv.add_argument("instance")
    sv.add_argument("--program", required=True, choices=["penalized", "signal", "corruption"])
    sv.add_argument("--lam", type=float)
    sv.add_argument("--bound", type=float)
    sv.add_argument("--signal-norm", default="l1", help="l1 | linf | l1l2:K | trace:M1,M2")
    sv.add_argument("--corruption-norm", default="l1", help="same forms as --signal-norm")
    sv.add_argument("--out", help="solution path (default: INSTANCE.sol)")
    _add_solver_flags(sv, SolverConfig())
    sv.set_defaults(func=cmd_solve)

    ph = sub.add_parser("phase", help="run a phase-transition grid")
    ph.add_argument("--config", help="key = value file; flags override")
    ph.add_argument("--experiment", choices=list(EXPERIMENTS))
    ph.add_argument("--p", type=int)
    ph.add_argument("--n", type=int)
    ph.add_argument("--n-values", type=_ints_arg)
    ph.add_argument("--s-sig-values", type=_ints_arg)
    ph.add_argument("--s-cor-values", type=_ints_arg)
    ph.add_argument("--m", type=int)
    ph.add_argument("--k", type=int)
    ph.add_argument("--lambda-rule")
    ph.add_argument("--reps", type=int)
    ph.add_argument("--delta", type=float)
    ph.add_argument("--noise-mode", choices=["sphere", "none"])
    ph.add_argument("--success-tol", type=float)
    ph.add_argument("--seed", type=int)
    ph.add_argument("--threads", type=int)
    ph.add_argument("--out")
    ph.add_argument("--theory-out")
    ph.add_argument("--svg")
    ph.add_argument("--resume", action="store_true")
    _add_solver_flags(ph, None)
    ph.set_defaults(func=cmd_phase)

    st = sub.add_parser("stable", help="run the stable-error study")
    st.add_argument("--config", help="key = value file; flags override")
    st.add_argument("--p-values", type=_ints_arg)
    st.add_argument("--n-values", type=_ints_arg)
    st.add_argument("--gamma-sig", type=float)
    st.add_argument("--gamma-cor", type=float)
    st.add_argument("--delta", type=float)
    st.add_argument("--reps", type=int)
    st.add_argument("--noise-mode", choices=["sphere", "none"])
    st.add_argument("--seed", type=int)
    st.add_argument("--threads", type=int)
    st.add_argument("--out")
    st.add_argument("--resume", action="store_true")
    _add_solver_flags(st, None)
    st.set_defaults(func=cmd_stable)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
