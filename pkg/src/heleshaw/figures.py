"""Matplotlib renderings of the delimited outputs (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_r_curve(qmags, rs, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(qmags, rs, "-", color="#1b4f72", lw=1.2)
    ax.set_xlabel("|q|")
    ax.set_ylabel("r")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_contour(q1_axis, q2_axis, matrix, levels, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 5.5))
    masked = np.ma.masked_invalid(matrix)
    cs = ax.contour(q1_axis, q2_axis, masked, levels=levels, linewidths=1.0)
    ax.clabel(cs, inline=True, fontsize=7, fmt="%.2f")
    ax.set_xlabel("q1")
    ax.set_ylabel("q2")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_compare(rows, path, title: str | None = None) -> None:
    q = [r.qmag for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(q, [r.r_2d for r in rows], "o-", label="2D breakthrough", color="#b03a2e")
    ax1.plot(q, [r.r_1d for r in rows], "s--", label="1D transit", color="#1b4f72")
    ax1.set_ylabel("r")
    ax1.legend()
    ax1.grid(alpha=0.3)
    ax2.semilogy(q, [max(r.abs_diff, 1e-16) for r in rows], "k.-")
    ax2.set_xlabel("|q1|")
    ax2.set_ylabel("|difference|")
    ax2.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_boundaries(snapshots, path, title: str | None = None) -> None:
    """Overlay of free-boundary polylines, one shade per snapshot time."""
    fig, ax = plt.subplots(figsize=(6, 6))
    times = [t for t, _z, _p in snapshots]
    tmax = max(times) if times and max(times) > 0 else 1.0
    cmap = plt.get_cmap("viridis")
    for t, _z, polylines in snapshots:
        color = cmap(0.1 + 0.8 * t / tmax)
        for poly in polylines:
            ax.plot(poly[:, 0], poly[:, 1], "-", color=color, lw=0.9)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_residual_history(history, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(len(history)), history, "o-", color="#1d8348")
    ax.set_xlabel("V-cycle")
    ax.set_ylabel("max-norm residual")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
