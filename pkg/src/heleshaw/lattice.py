"""Rational direction arithmetic for the rotated strip problem.

A direction is an integer pair (m1, m2) scaled by sigma > 0.  The rotated
coefficient is periodic transverse to the front only for such rational
directions; this module computes the rotation frame, the minimal transverse
period, and an oscillation scale eps for which the solution of the rescaled
problem is 1-periodic in the transverse coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def reduce_direction(m1: int, m2: int) -> tuple[tuple[int, int], int]:
    """Reduce (m1, m2) to a coprime pair and its positive gcd."""
    if m1 == 0 and m2 == 0:
        raise ValueError("direction (0, 0) is not allowed")
    g = math.gcd(abs(m1), abs(m2))
    return (m1 // g, m2 // g), g


def minimal_period(m1: int, m2: int) -> float:
    """Smallest s > 0 with s * zeta_perp on the integer lattice.

    Requires (m1, m2) coprime; equals the Euclidean norm of the pair.
    """
    if m1 == 0 and m2 == 0:
        raise ValueError("direction (0, 0) is not allowed")
    if math.gcd(abs(m1), abs(m2)) != 1:
        raise ValueError(f"({m1}, {m2}) must be coprime")
    return math.hypot(m1, m2)


def _round_half_away(x: float) -> int:
    # determinism at exact .5 (round-half-away-from-zero)
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def choose_epsilon(m1: int, m2: int, M: int) -> tuple[float, int]:
    """Oscillation scale for the sweep at grid size M.

    d = max(1, round(9*M / (64*|m|))) with |m| the unreduced norm, and
    eps = gcd(m1, m2) / (d*|m|); then 1/eps is d times the minimal
    transverse period of the reduced direction, so the rescaled rotated
    coefficient fits the unit cell exactly.
    """
    if m1 == 0 and m2 == 0:
        raise ValueError("direction (0, 0) is not allowed")
    if M < 1 or (M & (M - 1)) != 0:
        raise ValueError(f"M must be a power of two, got {M}")
    norm = math.hypot(m1, m2)
    d = max(1, _round_half_away(9.0 * M / (64.0 * norm)))
    g = math.gcd(abs(m1), abs(m2))
    return g / (d * norm), d


def frame(q1: float, q2: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Right-handed orthonormal frame (zeta, zeta_perp) for gradient q.

    zeta = -q/|q| points along the direction of propagation (pressure
    decreases toward the free boundary), zeta_perp = (-zeta2, zeta1).
    """
    norm = math.hypot(q1, q2)
    if norm == 0:
        raise ValueError("zero direction has no frame")
    zeta = (-q1 / norm, -q2 / norm)
    return zeta, (-zeta[1], zeta[0])


@dataclass(frozen=True)
class Direction:
    """A rational gradient direction with its derived solver geometry."""

    m1: int
    m2: int
    sigma: float
    q: tuple[float, float]
    qmag: float
    gcd: int
    reduced: tuple[int, int]
    zeta: tuple[float, float]
    zeta_perp: tuple[float, float]
    period: float
    epsilon: float
    d: int

    @classmethod
    def from_integers(cls, m1: int, m2: int, sigma: float, M: int) -> "Direction":
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        reduced, g = reduce_direction(m1, m2)
        q = (m1 * sigma, m2 * sigma)
        zeta, zperp = frame(*q)
        eps, d = choose_epsilon(m1, m2, M)
        return cls(
            m1=m1,
            m2=m2,
            sigma=sigma,
            q=q,
            qmag=math.hypot(*q),
            gcd=g,
            reduced=reduced,
            zeta=zeta,
            zeta_perp=zperp,
            period=minimal_period(*reduced),
            epsilon=eps,
            d=d,
        )
