"""Plain-text serialization of problem instances and solver solutions.

Format: line 1 holds ``n p delta``; the next n lines are the rows of the
measurement matrix (p reals each); then one line of n reals for y.  Two
optional sections follow, each introduced by a bare tag line: ``xstar``
(one line, p reals) and ``vstar`` (one line, n reals).  Reals are written
with 17 significant digits so round-trips are bit-faithful for doubles.
"""

from __future__ import annotations

import numpy as np

from .solver import ProblemInstance, SolverResult

__all__ = [
    "InstanceFormatError",
    "read_instance",
    "write_instance",
    "read_solution",
    "write_solution",
]

_FMT = "%.17g"


class InstanceFormatError(Exception):
    """Raised when an instance or solution file does not match the format."""


def _fmt_row(values: np.ndarray) -> str:
    return " ".join(_FMT % v for v in values)


def _parse_row(line: str, count: int, what: str, lineno: int) -> np.ndarray:
    parts = line.split()
    if len(parts) != count:
        raise InstanceFormatError(
            f"line {lineno}: expected {count} values for {what}, got {len(parts)}"
        )
    try:
        return np.array([float(tok) for tok in parts])
    except ValueError as exc:
        raise InstanceFormatError(f"line {lineno}: bad number in {what}: {exc}") from None


def write_instance(path: str, instance: ProblemInstance) -> None:
    n, p = instance.n, instance.p
    lines = [f"{n} {p} {_FMT % instance.delta}"]
    for i in range(n):
        lines.append(_fmt_row(instance.phi[i]))
    lines.append(_fmt_row(instance.y))
    if instance.x_star is not None:
        lines.append("xstar")
        lines.append(_fmt_row(instance.x_star))
    if instance.v_star is not None:
        lines.append("vstar")
        lines.append(_fmt_row(instance.v_star))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_instance(path: str) -> ProblemInstance:
    with open(path) as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    # drop trailing blank lines only; blanks elsewhere are format errors
    while raw and not raw[-1].strip():
        raw.pop()
    if not raw:
        raise InstanceFormatError("empty instance file")

    header = raw[0].split()
    if len(header) != 3:
        raise InstanceFormatError("line 1: expected 'n p delta'")
    try:
        n, p = int(header[0]), int(header[1])
        delta = float(header[2])
    except ValueError as exc:
        raise InstanceFormatError(f"line 1: {exc}") from None
    if n < 1 or p < 1:
        raise InstanceFormatError(f"line 1: dimensions must be positive, got n={n} p={p}")

    need = 1 + n + 1
    if len(raw) < need:
        raise InstanceFormatError(f"truncated file: need {need} lines before optional sections")
    phi = np.empty((n, p))
    for i in range(n):
        phi[i] = _parse_row(raw[1 + i], p, f"matrix row {i}", 2 + i)
    y = _parse_row(raw[1 + n], n, "y", 2 + n)

    x_star = None
    v_star = None
    pos = need
    seen = set()
    while pos < len(raw):
        tag = raw[pos].strip()
        if tag not in ("xstar", "vstar"):
            raise InstanceFormatError(f"line {pos + 1}: unexpected tag {tag!r}")
        if tag in seen:
            raise InstanceFormatError(f"line {pos + 1}: duplicate tag {tag!r}")
        seen.add(tag)
        if pos + 1 >= len(raw):
            raise InstanceFormatError(f"line {pos + 1}: tag {tag!r} without a data row")
        if tag == "xstar":
            x_star = _parse_row(raw[pos + 1], p, "xstar", pos + 2)
        else:
            v_star = _parse_row(raw[pos + 1], n, "vstar", pos + 2)
        pos += 2

    try:
        return ProblemInstance(
            phi=phi, y=y, delta=delta, x_star=x_star, v_star=v_star
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def write_solution(path: str, result: SolverResult) -> None:
    """Write the recovered pair in the same tagged-row style as instances."""
    lines = [
        "xhat",
        _fmt_row(result.x_hat),
        "vhat",
        _fmt_row(result.v_hat),
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_solution(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    while raw and not raw[-1].strip():
        raw.pop()
    if len(raw) != 4 or raw[0].strip() != "xhat" or raw[2].strip() != "vhat":
        raise InstanceFormatError("solution file must be: xhat line, row, vhat line, row")
    x_hat = _parse_row(raw[1], len(raw[1].split()), "xhat", 2)
    v_hat = _parse_row(raw[3], len(raw[3].split()), "vhat", 4)
    return x_hat, v_hat
