import math

import numpy as np
import pytest

from heleshaw import coeffs, ode1d

TIME_ONLY = "2 + 1*sin(0,0,1)"    # oscillates in t only: r = <g>|q| = 2|q|
SPACE_ONLY = "2 + 1*sin(1,0,0)"   # oscillates in x only: r = |q|/<1/g> = sqrt(3)|q|


def test_constant_speed():
    const = coeffs.CoefficientField(2.0)
    traj = ode1d.integrate_front(const, qmag=0.5, eps=1.0, T=4.0)
    assert traj.samples[-1] - traj.y0 == pytest.approx(4.0, rel=1e-12)
    assert traj.r == pytest.approx(1.0, rel=1e-12)


def test_time_only_average():
    g = coeffs.parse_coefficient(TIME_ONLY)
    r = ode1d.estimate_r1(g, qmag=1.0, eps=1e-2, T=20.0)
    assert r == pytest.approx(2.0, rel=1e-4)


def test_space_only_harmonic_mean():
    # quadrature oracle for the harmonic mean of 2 + sin(2*pi*x)
    xs = np.linspace(0.0, 1.0, 20001)
    inv_mean = np.trapezoid(1.0 / (2.0 + np.sin(2 * np.pi * xs)), xs)
    assert inv_mean == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-9)
    g = coeffs.parse_coefficient(SPACE_ONLY)
    r = ode1d.estimate_r1(g, qmag=1.0, eps=1e-2, T=20.0)
    assert r == pytest.approx(1.0 / inv_mean, rel=1e-3)


def test_pinned_traveling_wave():
    g = coeffs.traveling_wave(2.0, -1)
    for q in (0.35, 0.5, 0.7, 0.9):
        assert ode1d.estimate_r1(g, q, eps=1e-2, T=20.0) == pytest.approx(1.0, abs=1e-3)
    assert ode1d.estimate_r1(g, 1.1, eps=1e-2, T=20.0) > 1.01
    assert ode1d.estimate_r1(g, 0.3, eps=1e-2, T=20.0) < 0.99


def test_scaling_identity():
    g = coeffs.builtin_field("g1")
    r_eps = ode1d.estimate_r1(g, 0.7, eps=1e-2, T=5.0)
    r_unit = ode1d.estimate_r1(g, 0.7, eps=1.0, T=500.0)
    assert r_eps == pytest.approx(r_unit, rel=1e-12)


def test_trajectory_strictly_increasing():
    g = coeffs.builtin_field("g4")
    traj = ode1d.integrate_front(g, qmag=0.8, eps=0.05, T=2.0)
    assert np.all(np.diff(traj.samples) > 0)


def test_estimate_matches_trajectory_slope():
    g = coeffs.builtin_field("g1")
    traj = ode1d.integrate_front(g, 0.9, eps=0.05, T=3.0)
    r = ode1d.estimate_r1(g, 0.9, eps=0.05, T=3.0)
    assert r == traj.r


def test_estimate_within_coefficient_bounds():
    rng = np.random.default_rng(2)
    for name in ("g1", "g2", "g3", "g4"):
        g = coeffs.builtin_field(name)
        lo, hi = g.bounds()
        q = float(rng.uniform(0.2, 2.0))
        r = ode1d.estimate_r1(g, q, eps=0.05, T=5.0)
        assert lo * q - 1e-9 <= r <= hi * q + 1e-9


def test_comparison_principle_monotonicity():
    g = coeffs.builtin_field("fig1")
    qs = np.linspace(0.3, 3.0, 28)
    rs = ode1d.sweep_r1(g, qs, eps=1e-2, T=10.0)
    assert np.all(np.diff(rs) >= -1e-6)


def test_sweep_preserves_order_and_matches_single_runs():
    g = coeffs.builtin_field("g1")
    qs = [0.4, 1.3, 0.8]  # deliberately unsorted
    rs = ode1d.sweep_r1(g, qs, eps=0.05, T=5.0)
    singles = [ode1d.estimate_r1(g, q, eps=0.05, T=5.0) for q in qs]
    assert np.allclose(rs, singles, rtol=0, atol=1e-13)


def test_constant_sweep_is_linear():
    const = coeffs.CoefficientField(1.0)
    rs = ode1d.sweep_r1(const, [1.0, 2.0, 3.0], eps=1.0, T=5.0)
    assert np.allclose(rs, [1.0, 2.0, 3.0], rtol=1e-12)


def test_convergence_in_horizon():
    # |r(T) - r(2T)| <= C/T; C frozen from observed behavior with margin
    C = 2.0
    for name in ("g1", "g2", "g3", "g4", "fig1"):
        g = coeffs.builtin_field(name)
        for T in (5.0, 10.0):
            r1 = ode1d.estimate_r1(g, 0.8, eps=1e-2, T=T)
            r2 = ode1d.estimate_r1(g, 0.8, eps=1e-2, T=2 * T)
            assert abs(r1 - r2) <= C / T


def test_step_budget_guard():
    g = coeffs.builtin_field("g1")
    with pytest.raises(ValueError, match="step budget"):
        ode1d.integrate_front(g, 1.0, eps=1e-3, T=1.0, steps=100)
    with pytest.raises(ValueError, match="step budget"):
        ode1d.estimate_r1(g, 1.0, eps=1e-2, T=1.0, steps_per_period=10)


def test_invalid_arguments():
    g = coeffs.builtin_field("g1")
    with pytest.raises(ValueError):
        ode1d.estimate_r1(g, -1.0)
    with pytest.raises(ValueError):
        ode1d.estimate_r1(g, 1.0, eps=-0.1)
    with pytest.raises(ValueError):
        ode1d.sweep_r1(g, [0.5, -0.5])


def test_gate_transit_matches_constant_speed():
    const = coeffs.CoefficientField(2.0)
    r = ode1d.gate_transit_r(const, 0.5, eps=0.25, start=0.1, gate=0.9)
    assert r == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(ValueError):
        ode1d.gate_transit_r(const, 0.5, eps=0.25, start=0.9, gate=0.1)


def test_gate_transit_pinned():
    g = coeffs.traveling_wave(2.0, -1)
    r = ode1d.gate_transit_r(g, 0.5, eps=1.0 / 32, start=0.1, gate=0.9)
    assert r == pytest.approx(1.0, abs=2e-2)


def test_predicted_pinning():
    assert ode1d.predicted_pinning(1.0, 3.0) == pytest.approx((1 / 3, 1.0))
    assert ode1d.predicted_pinning(2.0, 2.0) == pytest.approx((0.5, 0.5))
    assert ode1d.predicted_pinning(1.0, 5.0) == pytest.approx((0.2, 1.0))
    with pytest.raises(ValueError):
        ode1d.predicted_pinning(0.0, 1.0)
    with pytest.raises(ValueError):
        ode1d.predicted_pinning(3.0, 1.0)


def test_pinning_matches_prediction_on_interval():
    g = coeffs.traveling_wave(2.0, -1)
    lo, hi = ode1d.predicted_pinning(*g.bounds())
    for q in np.linspace(lo + 0.03, hi - 0.03, 5):
        assert ode1d.estimate_r1(g, float(q), eps=1e-2, T=20.0) == pytest.approx(1.0, abs=1e-3)
