"""Self-contained SVG rendering of a phase-transition success map.

One rect per grid cell on a linear gray ramp (0 -> black, 1 -> white),
with the theoretical threshold curve overlaid as a red polyline.  Pure
text output, no external assets.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .experiments import BINARY_SPARSE, CellResult, TheoryPoint

__all__ = ["render_heatmap_svg"]

_CELL = 30
_LEFT = 70
_RIGHT = 18
_TOP = 34
_BOTTOM = 52


def _axis_values(results: list[CellResult]) -> tuple[list[int], list[int], str]:
    experiment = results[0].experiment
    if experiment == BINARY_SPARSE:
        xs = sorted({r.n for r in results})
        x_name = "n"
    else:
        xs = sorted({r.s_sig for r in results})
        x_name = "s_sig"
    return xs, sorted({r.s_cor for r in results}), x_name


def _tick_indices(count: int) -> list[int]:
    if count <= 15:
        return list(range(count))
    return [0, count - 1]


def render_heatmap_svg(
    results: list[CellResult], theory: list[TheoryPoint] | None = None
) -> str:
    """Render the success-rate grid of one experiment as an SVG document."""
    if not results:
        raise ValueError("nothing to render: empty result list")
    xs, ys, x_name = _axis_values(results)
    nx, ny = len(xs), len(ys)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: j for j, v in enumerate(ys)}

    grid_w, grid_h = nx * _CELL, ny * _CELL
    width = _LEFT + grid_w + _RIGHT
    height = _TOP + grid_h + _BOTTOM
    title = f"{results[0].experiment}  p={results[0].p}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_LEFT + grid_w / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]

    for r in results:
        x_val = r.n if x_name == "n" else r.s_sig
        i, j = xi[x_val], yi[r.s_cor]
        shade = int(round(255 * min(max(r.success_rate, 0.0), 1.0)))
        color = f"#{shade:02x}{shade:02x}{shade:02x}"
        px = _LEFT + i * _CELL
        py = _TOP + (ny - 1 - j) * _CELL
        parts.append(
            f'<rect x="{px}" y="{py}" width="{_CELL}" height="{_CELL}" fill="{color}"/>'
        )
    parts.append(
        f'<rect x="{_LEFT}" y="{_TOP}" width="{grid_w}" height="{grid_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )

    if theory:
        # map the continuous ordinate into pixel space through the cell
        # index axis, so unevenly spaced grids still draw sensibly
        runs: list[list[str]] = [[]]
        for pt in theory:
            if pt.ordinate is None:
                if runs[-1]:
                    runs.append([])
                continue
            i = xi[pt.abscissa]
            fy = float(np.interp(pt.ordinate, ys, np.arange(ny)))
            px = _LEFT + (i + 0.5) * _CELL
            py = _TOP + (ny - 1 - fy) * _CELL + 0.5 * _CELL
            runs[-1].append(f"{px:.1f},{py:.1f}")
        for run in runs:
            if len(run) >= 2:
                parts.append(
                    f'<polyline points="{" ".join(run)}" fill="none" '
                    f'stroke="red" stroke-width="2"/>'
                )

    font = 'font-family="sans-serif" font-size="11"'
    for i in _tick_indices(nx):
        px = _LEFT + (i + 0.5) * _CELL
        parts.append(
            f'<text x="{px:.1f}" y="{_TOP + grid_h + 16}" text-anchor="middle" {font}>{xs[i]}</text>'
        )
    for j in _tick_indices(ny):
        py = _TOP + (ny - 1 - j) * _CELL + 0.5 * _CELL + 4
        parts.append(
            f'<text x="{_LEFT - 8}" y="{py:.1f}" text-anchor="end" {font}>{ys[j]}</text>'
        )
    parts.append(
        f'<text x="{_LEFT + grid_w / 2:.1f}" y="{_TOP + grid_h + 38}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">{escape(x_name)}</text>'
    )
    y_mid = _TOP + grid_h / 2
    parts.append(
        f'<text x="18" y="{y_mid:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {y_mid:.1f})">s_cor</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
