"""Homogenized free-boundary velocity of Hele-Shaw flow in periodic media.

A fast one-dimensional front integrator estimates the averaged velocity
r(q) on the axis; a two-dimensional enthalpy solver built on a geometric
multigrid kernel estimates it for arbitrary rational directions via
breakthrough times; sweep orchestration maps r over a grid of directions
and emits CSV tables, contour matrices, SVG level curves and figures.
"""

from .coeffs import (
    CoefficientField,
    GridSampler,
    ProductTerm,
    Wave,
    builtin_field,
    parse_coefficient,
    traveling_wave,
)
from .lattice import Direction, choose_epsilon, frame, minimal_period, reduce_direction
from .multigrid import MultigridSolver
from .ode1d import (
    FrontTrajectory,
    estimate_r1,
    gate_transit_r,
    integrate_front,
    predicted_pinning,
    sweep_r1,
)
from .stefan import (
    BreakthroughTimeout,
    EnthalpyState,
    RunParams,
    SourceSpec,
    extract_boundary,
    init_disk,
    init_strip,
    make_delta,
    run_breakthrough,
    run_facet,
    step,
    step_source,
)
from .sweep import CompareRow, SweepConfig, SweepRecord, compare_axis, sweep2d

__version__ = "0.1.0"

__all__ = [
    "BreakthroughTimeout",
    "CoefficientField",
    "CompareRow",
    "Direction",
    "EnthalpyState",
    "FrontTrajectory",
    "GridSampler",
    "MultigridSolver",
    "ProductTerm",
    "RunParams",
    "SourceSpec",
    "SweepConfig",
    "SweepRecord",
    "Wave",
    "builtin_field",
    "choose_epsilon",
    "compare_axis",
    "estimate_r1",
    "extract_boundary",
    "frame",
    "gate_transit_r",
    "init_disk",
    "init_strip",
    "integrate_front",
    "make_delta",
    "minimal_period",
    "parse_coefficient",
    "predicted_pinning",
    "reduce_direction",
    "run_breakthrough",
    "run_facet",
    "step",
    "step_source",
    "sweep2d",
    "sweep_r1",
    "traveling_wave",
]
