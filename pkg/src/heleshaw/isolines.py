"""Marching-squares iso-line extraction on rectilinear grids.

Works on a values[i, j] array with per-axis node coordinates, optionally
periodic in either axis (the wrap cell joins the last node to the first at
coordinate ``coord[0] + period``).  Crossed cell edges are keyed by their
grid identity, so chaining into polylines is exact; saddle cells are
disambiguated by the cell-center average.  Cells touching a NaN value are
skipped.
"""

from __future__ import annotations

import numpy as np


def iso_polylines(values: np.ndarray, level: float = 0.0,
                  row_coords=None, col_coords=None,
                  wrap_rows: bool = False, wrap_cols: bool = False,
                  row_period: float = 1.0, col_period: float = 1.0) -> list[np.ndarray]:
    """Polylines of the `values = level` set as (n, 2) coordinate arrays.

    The first output column is the row coordinate, the second the column
    coordinate.  On wrapped axes chains are unwrapped continuously
    (consecutive points always share a grid cell, so representation jumps
    are exact multiples of the period); a loop around a periodic direction
    comes out as one polyline whose endpoints differ by the period.
    """
    v = np.asarray(values, dtype=float)
    nr, nc = v.shape
    if row_coords is None:
        row_coords = np.arange(nr, dtype=float)
    if col_coords is None:
        col_coords = np.arange(nc, dtype=float)
    row_coords = np.asarray(row_coords, dtype=float)
    col_coords = np.asarray(col_coords, dtype=float)

    w = v - level
    above = w > 0.0

    def row_coord(i):
        return row_coords[i] if i < nr else row_coords[0] + row_period

    def col_coord(j):
        return col_coords[j] if j < nc else col_coords[0] + col_period

    def interp(a, b):
        return a / (a - b)

    n_row_cells = nr if wrap_rows else nr - 1
    n_col_cells = nc if wrap_cols else nc - 1

    segments = []
    for i in range(n_row_cells):
        i1 = (i + 1) % nr
        for j in range(n_col_cells):
            j1 = (j + 1) % nc
            quad = (w[i, j], w[i1, j], w[i, j1], w[i1, j1])
            if np.isnan(quad).any():
                continue
            c00, c10 = above[i, j], above[i1, j]
            c01, c11 = above[i, j1], above[i1, j1]
            if c00 == c10 == c01 == c11:
                continue
            # crossing points keyed by (axis, i, j) of the crossed edge
            pts = {}
            if c00 != c10:
                pts["s"] = ("r", i, j, interp(w[i, j], w[i1, j]))
            if c01 != c11:
                pts["n"] = ("r", i, (j + 1) % nc if wrap_cols else j + 1,
                            interp(w[i, j1], w[i1, j1]))
            if c00 != c01:
                pts["w"] = ("c", i, j, interp(w[i, j], w[i, j1]))
            if c10 != c11:
                pts["e"] = ("c", (i + 1) % nr if wrap_rows else i + 1, j,
                            interp(w[i1, j], w[i1, j1]))
            if len(pts) == 2:
                a, b = sorted(pts)
                segments.append((pts[a], pts[b]))
            elif len(pts) == 4:
                center = 0.25 * (quad[0] + quad[1] + quad[2] + quad[3])
                if (center > 0.0) == c00:
                    segments.append((pts["s"], pts["e"]))
                    segments.append((pts["n"], pts["w"]))
                else:
                    segments.append((pts["s"], pts["w"]))
                    segments.append((pts["n"], pts["e"]))

    def edge_key(p):
        axis, i, j, _ = p
        return axis, i % nr, j % nc

    adjacency: dict = {}
    for seg in segments:
        for end in (0, 1):
            adjacency.setdefault(edge_key(seg[end]), []).append(seg)

    def point_coords(p):
        axis, i, j, frac = p
        if axis == "r":  # along rows: from node (i, j) to (i+1, j)
            r = row_coords[i] + frac * (row_coord(i + 1) - row_coords[i])
            return r, col_coords[j % nc]
        c = col_coords[j] + frac * (col_coord(j + 1) - col_coords[j])
        return row_coords[i % nr], c

    used = set()
    polylines = []
    for seg in segments:
        if id(seg) in used:
            continue
        used.add(id(seg))
        chain = [seg[0], seg[1]]
        for grow_end in (True, False):
            while True:
                tip = chain[-1] if grow_end else chain[0]
                nxt = None
                for cand in adjacency.get(edge_key(tip), ()):
                    if id(cand) not in used:
                        nxt = cand
                        break
                if nxt is None:
                    break
                used.add(id(nxt))
                other = nxt[1] if edge_key(nxt[0]) == edge_key(tip) else nxt[0]
                if grow_end:
                    chain.append(other)
                else:
                    chain.insert(0, other)
        coords = np.array([point_coords(p) for p in chain])
        if wrap_rows:
            _unwrap(coords[:, 0], row_period)
        if wrap_cols:
            _unwrap(coords[:, 1], col_period)
        polylines.append(coords)
    return polylines


def _unwrap(c: np.ndarray, period: float) -> None:
    """Shift entries by period multiples so consecutive steps stay short."""
    offset = 0.0
    for k in range(1, len(c)):
        c[k] += offset
        delta = c[k] - c[k - 1]
        if delta > 0.5 * period:
            c[k] -= period
            offset -= period
        elif delta < -0.5 * period:
            c[k] += period
            offset += period
