"""Sweep orchestration over rational directions and the 1D/2D comparison.

A sweep covers an (m1, m2) grid of propagation directions (first quadrant
by default, plotted-coordinate convention), runs the breakthrough solver
for each, and collects records sorted by (m1, m2) regardless of worker
scheduling.  The gradient actually driving a run points opposite the
propagation direction (the flux is negative); records report the positive
plotted components.

Workers are separate processes; each run is independent and deterministic,
so the worker count never changes any output value.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from multiprocessing import get_context

from . import ode1d, stefan
from .coeffs import parse_coefficient
from .lattice import Direction

EPS_RESOLUTION_FACTOR = 4.0  # flag rows with eps < 4h (under-resolved oscillation)


@dataclass(frozen=True)
class SweepConfig:
    """Everything a worker needs to run one direction (picklable)."""

    coefficient: str
    M: int
    directions: tuple[tuple[int, int], ...]
    sigma: float | None = None
    lam: float = stefan.LAMBDA_DEFAULT
    tau_divisor: float = stefan.TAU_DIVISOR_DEFAULT
    cycles_per_step: int = 2
    L0: float = 0.1
    L1: float = 0.9
    workers: int = 1

    def resolved_sigma(self) -> float:
        return 6.4 / self.M if self.sigma is None else self.sigma

    @staticmethod
    def quadrant(mmax: int) -> tuple[tuple[int, int], ...]:
        """Default direction grid: (m1, m2) in [0, mmax]^2 minus the origin."""
        if mmax < 1:
            raise ValueError("mmax must be >= 1")
        return tuple(
            (m1, m2)
            for m1 in range(mmax + 1)
            for m2 in range(mmax + 1)
            if (m1, m2) != (0, 0)
        )


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row; q components are the plotted (positive) ones."""

    m1: int
    m2: int
    q1: float
    q2: float
    qmag: float
    eps_inv: float
    T_eps: float
    r_est: float
    steps: int
    monotonicity_violations: int
    status: str
    wall_seconds: float  # kept out of the CSV: timing is not reproducible


def run_direction(config: SweepConfig, m1: int, m2: int) -> SweepRecord:
    """Run the breakthrough solver for one (m1, m2) propagation direction."""
    sigma = config.resolved_sigma()
    field = parse_coefficient(config.coefficient)
    # gradient points opposite the propagation/plot direction
    direction = Direction.from_integers(-m1, -m2, sigma, config.M)
    gmin, gmax = field.bounds()
    params = stefan.RunParams.make(
        M=config.M,
        gmax=gmax,
        gmin=gmin,
        q1=-direction.qmag,
        lam=config.lam,
        tau_divisor=config.tau_divisor,
        cycles_per_step=config.cycles_per_step,
        L0=config.L0,
        L1=config.L1,
    )
    status = "ok"
    if direction.epsilon < EPS_RESOLUTION_FACTOR / config.M:
        status = "eps_guard"
    t0 = time.perf_counter()
    try:
        result = stefan.run_breakthrough(params, field, direction)
        T_eps, r_est = result.T_eps, result.r_est
        steps = result.diagnostics.steps
        violations = result.diagnostics.monotonicity_violations
    except stefan.BreakthroughTimeout as exc:
        status = "timeout"
        T_eps, r_est = math.nan, math.nan
        steps = exc.diagnostics.steps
        violations = exc.diagnostics.monotonicity_violations
    return SweepRecord(
        m1=m1,
        m2=m2,
        q1=m1 * sigma,
        q2=m2 * sigma,
        qmag=direction.qmag,
        eps_inv=1.0 / direction.epsilon,
        T_eps=T_eps,
        r_est=r_est,
        steps=steps,
        monotonicity_violations=violations,
        status=status,
        wall_seconds=time.perf_counter() - t0,
    )


def _worker(args) -> SweepRecord:
    config, m1, m2 = args
    return run_direction(config, m1, m2)


def sweep2d(config: SweepConfig) -> list[SweepRecord]:
    """Run every direction in the config; records sorted by (m1, m2)."""
    parse_coefficient(config.coefficient)  # fail fast on a bad spec
    tasks = [(config, m1, m2) for m1, m2 in config.directions]
    if config.workers <= 1:
        records = [_worker(t) for t in tasks]
    else:
        with get_context("fork").Pool(config.workers) as pool:
            records = pool.map(_worker, tasks)
    return sorted(records, key=lambda r: (r.m1, r.m2))


# -- axis comparison against the one-dimensional integrator -------------------

@dataclass(frozen=True)
class CompareRow:
    qmag: float
    r_2d: float
    r_1d: float
    abs_diff: float


@dataclass
class CompareResult:
    rows: list[CompareRow]
    max_error: float


def compare_axis(field_spec: str, M: int, eps_inv: float, qmags,
                 lam: float = stefan.LAMBDA_DEFAULT,
                 tau_divisor: float = stefan.TAU_DIVISOR_DEFAULT,
                 cycles_per_step: int = 2,
                 L0: float = 0.1, L1: float = 0.9) -> CompareResult:
    """2D breakthrough vs 1D gate transit on the x1 axis at matching eps.

    The 1D reference integrates the same rescaled coefficient from L0 to
    the grid column nearest L1 (the solver's gate), so both estimates
    measure the same finite-eps transit and the difference isolates the
    spatial discretization error.
    """
    field = parse_coefficient(field_spec) if isinstance(field_spec, str) else field_spec
    eps = 1.0 / eps_inv
    gmin, gmax = field.bounds()
    rows = []
    for qmag in qmags:
        params = stefan.RunParams.make(
            M=M, gmax=gmax, gmin=gmin, q1=-qmag, lam=lam,
            tau_divisor=tau_divisor, cycles_per_step=cycles_per_step,
            L0=L0, L1=L1,
        )
        result = stefan.run_breakthrough(params, field.rescaled(eps))
        gate = params.gate_index / M
        transit = ode1d.gate_transit_r(field, qmag, eps, L0, gate)
        r_1d = (L1 - L0) / ((gate - L0) / transit)
        rows.append(CompareRow(qmag, result.r_est, r_1d, abs(result.r_est - r_1d)))
    return CompareResult(rows=rows, max_error=max(r.abs_diff for r in rows))
