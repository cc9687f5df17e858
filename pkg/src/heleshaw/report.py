"""File emission: CSV tables, contour matrices, SVG level curves, figures.

The CSV is the single source of truth and is byte-reproducible: floats are
written as their shortest round-trip decimal and the non-deterministic
timing column is kept out (timings go to the CLI's log stream).  The SVG
and the matplotlib figures are derived views and never parsed back.
"""

from __future__ import annotations

import math

import numpy as np

from .isolines import iso_polylines

RECORD_COLUMNS = (
    "m1", "m2", "q1", "q2", "qmag", "eps_inv",
    "T_eps", "r_est", "steps", "monotonicity_violations", "status",
)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def records_csv_text(records) -> str:
    lines = [",".join(RECORD_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, col)) for col in RECORD_COLUMNS))
    return "\n".join(lines) + "\n"


def write_records_csv(records, path) -> None:
    """Sweep records, one line each, sorted order as given."""
    with open(path, "w", newline="") as fh:
        fh.write(records_csv_text(records))


def compare_csv_text(rows) -> str:
    lines = ["qmag,r_2d,r_1d,abs_diff"]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (r.qmag, r.r_2d, r.r_1d, r.abs_diff)))
    return "\n".join(lines) + "\n"


def write_compare_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(compare_csv_text(rows))


def r1d_csv_text(qmags, rs) -> str:
    lines = ["qmag,r"]
    for q, r in zip(qmags, rs):
        lines.append(f"{_fmt(q)},{_fmt(r)}")
    return "\n".join(lines) + "\n"


def write_boundary_csv(snapshots, path) -> None:
    """Facet polylines: one row per point, keyed by snapshot time and piece."""
    lines = ["t,piece,x1,x2"]
    for t, _z, polylines in snapshots:
        for piece, poly in enumerate(polylines):
            for x1, x2 in poly:
                lines.append(f"{_fmt(t)},{piece},{_fmt(x1)},{_fmt(x2)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# -- contour matrix ------------------------------------------------------------

def records_to_matrix(records):
    """Arrange sweep records on the full rectangular (m1, m2) grid.

    Returns (q1_axis, q2_axis, matrix) with matrix[m2_index, m1_index] and
    NaN in cells without a finished record (the origin always misses).
    """
    m1s = sorted({r.m1 for r in records})
    m2s = sorted({r.m2 for r in records})
    sigma = None
    for r in records:
        if r.m1 != 0:
            sigma = r.q1 / r.m1
            break
        if r.m2 != 0:
            sigma = r.q2 / r.m2
            break
    if sigma is None:
        raise ValueError("cannot infer sigma from records")
    matrix = np.full((len(m2s), len(m1s)), np.nan)
    index1 = {m: k for k, m in enumerate(m1s)}
    index2 = {m: k for k, m in enumerate(m2s)}
    for r in records:
        if r.status != "timeout" and not math.isnan(r.r_est):
            matrix[index2[r.m2], index1[r.m1]] = r.r_est
    q1_axis = np.array([m * sigma for m in m1s])
    q2_axis = np.array([m * sigma for m in m2s])
    return q1_axis, q2_axis, matrix


def write_contour_matrix(records, path) -> None:
    """Two header lines with the q-axes, then r rows with m2 ascending."""
    q1_axis, q2_axis, matrix = records_to_matrix(records)
    lines = [
        " ".join(_fmt(v) for v in q1_axis),
        " ".join(_fmt(v) for v in q2_axis),
    ]
    for row in matrix:
        lines.append(" ".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_contour_matrix(path):
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    q1_axis = np.array([float(v) for v in lines[0].split()])
    q2_axis = np.array([float(v) for v in lines[1].split()])
    matrix = np.array([[float(v) for v in line.split()] for line in lines[2:]])
    return q1_axis, q2_axis, matrix


# -- SVG level curves ----------------------------------------------------------

_SVG_PALETTE = (
    "#1b4f72", "#b03a2e", "#1d8348", "#7d3c98", "#b7950b",
    "#2874a6", "#ba4a00", "#117864", "#6c3483", "#9a7d0a",
)


def contour_polylines(q1_axis, q2_axis, matrix, level):
    """Marching-squares level curves of the r matrix, as (q1, q2) points."""
    polys = iso_polylines(
        matrix, level=level, row_coords=q2_axis, col_coords=q1_axis
    )
    # iso_polylines yields (row, col) = (q2, q1); flip to (q1, q2)
    return [p[:, ::-1] for p in polys]


def render_contour_svg(q1_axis, q2_axis, matrix, levels, path,
                       size: int = 480, margin: int = 40) -> None:
    """Write level curves as one SVG path element per non-empty level."""
    span1 = q1_axis[-1] - q1_axis[0] or 1.0
    span2 = q2_axis[-1] - q2_axis[0] or 1.0

    def to_px(q1, q2):
        x = margin + (q1 - q1_axis[0]) / span1 * size
        y = margin + size - (q2 - q2_axis[0]) / span2 * size
        return x, y

    total = size + 2 * margin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" '
        f'viewBox="0 0 {total} {total}">',
        f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    for k, level in enumerate(levels):
        pieces = contour_polylines(q1_axis, q2_axis, matrix, level)
        if not pieces:
            continue
        d = []
        for poly in pieces:
            pts = [to_px(q1, q2) for q1, q2 in poly]
            d.append("M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in pts))
        color = _SVG_PALETTE[k % len(_SVG_PALETTE)]
        parts.append(
            f'<path d="{" ".join(d)}" fill="none" stroke="{color}" '
            f'stroke-width="1.2"><title>r = {_fmt(level)}</title></path>'
        )
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def default_levels(matrix, count: int = 12):
    """Evenly spaced levels through the finite range of the matrix."""
    finite = matrix[np.isfinite(matrix)]
    if finite.size == 0:
        return []
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        return [lo]
    return list(np.linspace(lo, hi, count + 2)[1:-1])
