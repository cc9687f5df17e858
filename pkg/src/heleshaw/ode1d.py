"""One-dimensional front integrator and velocity estimator.

The front position solves y'(t) = g(y/eps, t/eps) * qmag; the long-time
slope (y(T) - y0)/T estimates the homogenized velocity for gradient
magnitude qmag.  By the scaling identity y_eps(t) = eps * Y(t/eps), all
integration runs at scale 1 internally over the span T/eps; both
parameterizations are exposed and agree to rounding.

The right-hand side is smooth, so a fixed-step classical RK4 is used: a
deterministic scheme keeps sweep output bit-reproducible across runs and
worker counts.  Step control is expressed as steps per fast period
(default 200, hard floor 50).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .coeffs import TWO_PI, CoefficientField

MIN_STEPS_PER_PERIOD = 50
DEFAULT_STEPS_PER_PERIOD = 200


def _ray_coeffs(field: CoefficientField):
    """Phase rates of each wave factor along the ray x = (x1, 0).

    angle(f) = a[f]*x1 + b[f]*t in the field's own frame and scale.
    """
    const, coefs, offsets, kinds, amps, k1, k2, w, R, inv = field.packed()
    a = TWO_PI * (k1 * R[0, 0] + k2 * R[1, 0]) * inv
    b = TWO_PI * w * inv
    return const, coefs, offsets, kinds, amps, a, b


@njit(cache=True)
def _g_ray(y, s, const, coefs, offsets, kinds, amps, aa, bb):
    g = const
    for p in range(coefs.size):
        prod = coefs[p]
        for f in range(offsets[p], offsets[p + 1]):
            ang = aa[f] * y + bb[f] * s
            if kinds[f] == 0:
                prod *= amps[f] * math.sin(ang)
            else:
                prod *= amps[f] * math.cos(ang)
        g += prod
    return g


@njit(cache=True)
def _rk4_path(y0, n, dt, qmag, const, coefs, offsets, kinds, amps, aa, bb, out):
    y = y0
    out[0] = y
    for i in range(n):
        s = i * dt
        k1 = _g_ray(y, s, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k2 = _g_ray(y + 0.5 * dt * k1, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k3 = _g_ray(y + 0.5 * dt * k2, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k4 = _g_ray(y + dt * k3, s + dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return y


@njit(cache=True)
def _rk4_end(y0, n, dt, qmag, const, coefs, offsets, kinds, amps, aa, bb):
    y = y0
    for i in range(n):
        s = i * dt
        k1 = _g_ray(y, s, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k2 = _g_ray(y + 0.5 * dt * k1, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k3 = _g_ray(y + 0.5 * dt * k2, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k4 = _g_ray(y + dt * k3, s + dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


@njit(cache=True, parallel=True)
def _rk4_sweep(y0, n, dt, qmags, const, coefs, offsets, kinds, amps, aa, bb, out):
    for idx in prange(qmags.size):
        out[idx] = (
            _rk4_end(y0, n, dt, qmags[idx], const, coefs, offsets, kinds, amps, aa, bb)
            - y0
        ) / (n * dt)


@njit(cache=True)
def _rk4_gate(y0, gate, dt, max_steps, qmag, const, coefs, offsets, kinds, amps, aa, bb):
    """Scaled time at which the trajectory crosses `gate` (-1 if never)."""
    y = y0
    for i in range(max_steps):
        s = i * dt
        k1 = _g_ray(y, s, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k2 = _g_ray(y + 0.5 * dt * k1, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k3 = _g_ray(y + 0.5 * dt * k2, s + 0.5 * dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        k4 = _g_ray(y + dt * k3, s + dt, const, coefs, offsets, kinds, amps, aa, bb) * qmag
        ynew = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if ynew >= gate:
            return s + dt * (gate - y) / (ynew - y)
        y = ynew
    return -1.0


@dataclass(frozen=True)
class FrontTrajectory:
    """Sampled front path and its velocity estimate."""

    y0: float
    horizon: float
    eps: float
    qmag: float
    n: int
    times: np.ndarray
    samples: np.ndarray
    r: float


def _resolve_steps(T, eps, steps, steps_per_period):
    span = T / eps
    if steps is None:
        steps = int(math.ceil(steps_per_period * span))
    if steps < MIN_STEPS_PER_PERIOD * span:
        raise ValueError(
            f"step budget too small: {steps} steps over {span:g} fast periods "
            f"(need at least {MIN_STEPS_PER_PERIOD} per period)"
        )
    return steps, span


def integrate_front(
    field: CoefficientField,
    qmag: float,
    eps: float = 1.0,
    T: float = 20.0,
    steps: int | None = None,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    y0: float = 0.0,
) -> FrontTrajectory:
    """Integrate y' = g(y/eps, t/eps)*qmag with classical RK4."""
    if qmag <= 0:
        raise ValueError(f"qmag must be positive, got {qmag}")
    if eps <= 0 or T <= 0:
        raise ValueError("eps and T must be positive")
    n, span = _resolve_steps(T, eps, steps, steps_per_period)
    dt = span / n
    out = np.empty(n + 1)
    _rk4_path(y0 / eps, n, dt, qmag, *_ray_coeffs(field), out)
    times = eps * dt * np.arange(n + 1)
    samples = eps * out
    r = (out[n] - out[0]) / (n * dt)
    return FrontTrajectory(
        y0=y0, horizon=T, eps=eps, qmag=qmag, n=n, times=times, samples=samples, r=r
    )


def estimate_r1(
    field: CoefficientField,
    qmag: float,
    eps: float = 1.0,
    T: float = 20.0,
    steps: int | None = None,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    y0: float = 0.0,
) -> float:
    """Velocity estimate (y(T) - y0)/T for gradient magnitude qmag."""
    if qmag <= 0:
        raise ValueError(f"qmag must be positive, got {qmag}")
    if eps <= 0 or T <= 0:
        raise ValueError("eps and T must be positive")
    n, span = _resolve_steps(T, eps, steps, steps_per_period)
    dt = span / n
    yend = _rk4_end(y0 / eps, n, dt, qmag, *_ray_coeffs(field))
    return (yend - y0 / eps) / (n * dt)


def sweep_r1(
    field: CoefficientField,
    qmags,
    eps: float = 1.0,
    T: float = 20.0,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    y0: float = 0.0,
) -> np.ndarray:
    """Velocity estimates for a list of gradient magnitudes (order kept)."""
    qmags = np.asarray(qmags, dtype=float)
    if np.any(qmags <= 0):
        raise ValueError("all qmag values must be positive")
    n, span = _resolve_steps(T, eps, None, steps_per_period)
    dt = span / n
    out = np.empty(qmags.size)
    _rk4_sweep(y0 / eps, n, dt, qmags, *_ray_coeffs(field), out)
    return out


def gate_transit_r(
    field: CoefficientField,
    qmag: float,
    eps: float,
    start: float,
    gate: float,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    max_periods: float = 1e6,
) -> float:
    """(gate - start) / T with T the first crossing time of the gate.

    Mirrors the breakthrough-time estimate of the two-dimensional solver on
    the same finite eps, which makes it the matched one-dimensional
    reference for axis-aligned directions.
    """
    if gate <= start:
        raise ValueError("gate must lie beyond start")
    if steps_per_period < MIN_STEPS_PER_PERIOD:
        raise ValueError(f"steps_per_period must be >= {MIN_STEPS_PER_PERIOD}")
    dt = 1.0 / steps_per_period
    lo, _ = field.bounds()
    needed = (gate - start) / (eps * lo * qmag) / dt
    max_steps = int(min(max_periods * steps_per_period, math.ceil(needed) + steps_per_period))
    s_hit = _rk4_gate(
        start / eps, gate / eps, dt, max_steps, qmag, *_ray_coeffs(field)
    )
    if s_hit < 0:
        raise RuntimeError(f"front did not reach the gate within {max_steps} steps")
    return (gate - start) / (eps * s_hit)


def predicted_pinning(fmin: float, fmax: float) -> tuple[float, float]:
    """Gradient-magnitude interval [1/fmax, 1/fmin] with pinned velocity 1.

    Applies to coefficients of traveling-wave form g(x, t) = f(x - t).
    """
    if fmin <= 0:
        raise ValueError(f"fmin must be positive, got {fmin}")
    if fmax < fmin:
        raise ValueError("fmax must be >= fmin")
    return 1.0 / fmax, 1.0 / fmin
