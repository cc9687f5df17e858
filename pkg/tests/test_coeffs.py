import math

import numpy as np
import pytest

from heleshaw import coeffs
from heleshaw.coeffs import CoefficientField, GridSampler, ProductTerm, Wave

CATALOG = ["g1", "g2", "g3", "g4", "fig1"]


def test_catalog_point_values():
    g1 = coeffs.builtin_field("g1")
    assert g1.value(0.0, 0.0, 0.0) == pytest.approx(2.0)
    assert g1.value(0.25, 0.0, 0.0) == pytest.approx(3.0)
    g2 = coeffs.builtin_field("g2")
    assert g2.value(0.25, 0.25, 0.0) == pytest.approx(5.0)
    g3 = coeffs.builtin_field("g3")
    assert g3.value(0.25, 0.25, 0.0) == pytest.approx(3.0)


def test_unknown_builtin_rejected():
    with pytest.raises(ValueError, match="unknown builtin"):
        coeffs.builtin_field("g9")


def test_non_positive_field_rejected():
    with pytest.raises(ValueError, match="not positive"):
        CoefficientField(1.0, [ProductTerm(1.0, (Wave("sin", 1, 0, 0),))])
    # exactly touching zero is rejected too
    with pytest.raises(ValueError, match="not positive"):
        coeffs.traveling_wave(1.0)


def test_constant_field_and_rescaling():
    c = CoefficientField(2.0)
    assert c.value(0.3, -1.2, 7.0) == 2.0
    assert c.dt_inv(0.1, 0.2, 0.3) == 0.0
    g1 = coeffs.builtin_field("g1")
    assert g1.rescaled(0.5).value(0.125, 0.0, 0.0) == pytest.approx(3.0)
    assert g1.rescaled(1.0).value(0.37, 0.21, 0.13) == pytest.approx(
        g1.value(0.37, 0.21, 0.13)
    )


def test_dt_inv_values_and_chain_rule():
    g1 = coeffs.builtin_field("g1")
    assert g1.dt_inv(0.0, 0.0, 0.0) == pytest.approx(-math.pi / 2, rel=1e-14)
    assert g1.rescaled(0.25).dt_inv(0.0, 0.0, 0.0) == pytest.approx(-2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("name", CATALOG)
def test_dt_inv_matches_finite_difference(name):
    g = coeffs.builtin_field(name)
    rng = np.random.default_rng(7)
    pts = rng.uniform(0, 1, (20, 3))
    dt = 1e-6
    for x1, x2, t in pts:
        fd = (1.0 / g.value(x1, x2, t + dt) - 1.0 / g.value(x1, x2, t - dt)) / (2 * dt)
        assert g.dt_inv(x1, x2, t) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("name", CATALOG)
def test_dt_inv_richardson_slope(name):
    # second-order central difference converges at slope >= 1.9
    g = coeffs.builtin_field(name).rescaled(0.5)
    x1, x2, t = 0.31, 0.17, 0.47
    exact = g.dt_inv(x1, x2, t)

    def fd_err(dt):
        fd = (1.0 / g.value(x1, x2, t + dt) - 1.0 / g.value(x1, x2, t - dt)) / (2 * dt)
        return abs(fd - exact)

    e1, e2 = fd_err(1e-3), fd_err(5e-4)
    if e1 < 1e-13:  # derivative of this term vanishes here
        return
    slope = math.log(e1 / e2) / math.log(2.0)
    assert slope >= 1.9


@pytest.mark.parametrize("name", CATALOG)
def test_periodicity_in_all_arguments(name):
    g = coeffs.builtin_field(name)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, (50, 3))
    base = g.value(pts[:, 0], pts[:, 1], pts[:, 2])
    for shift in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        shifted = g.value(pts[:, 0] + shift[0], pts[:, 1] + shift[1], pts[:, 2] + shift[2])
        assert np.max(np.abs(shifted - base)) <= 1e-12


@pytest.mark.parametrize("name", CATALOG)
def test_positivity_on_quasi_random_samples(name):
    g = coeffs.builtin_field(name)
    # Halton-style lattice sample, 10^6 points
    n = 1_000_000
    k = np.arange(n)
    x1 = (k * 0.7548776662466927) % 1.0
    x2 = (k * 0.5698402909980532) % 1.0
    t = (k * 0.3247179572447458) % 1.0
    vals = g.value(x1, x2, t)
    assert vals.min() > 0


@pytest.mark.parametrize("name", CATALOG)
def test_bounds_contain_sampled_range(name):
    g = coeffs.builtin_field(name)
    lo, hi = g.bounds()
    grid = np.linspace(0.0, 1.0, 64, endpoint=False)
    x1, x2, t = np.meshgrid(grid, grid, grid, indexing="ij")
    vals = g.value(x1, x2, t)
    assert lo <= vals.min() and vals.max() <= hi


def test_bounds_exact_cases():
    assert coeffs.builtin_field("g1").bounds() == pytest.approx((1.0, 3.0))
    assert coeffs.builtin_field("g2").bounds() == pytest.approx((1.0, 5.0))
    assert coeffs.builtin_field("g3").bounds() == pytest.approx((1.0, 3.0))


def test_rotation_identity_and_unit_check():
    g1 = coeffs.builtin_field("g1")
    rot = g1.rotated((1.0, 0.0))
    pts = np.random.default_rng(0).uniform(0, 1, (20, 3))
    assert np.allclose(
        rot.value(pts[:, 0], pts[:, 1], pts[:, 2]),
        g1.value(pts[:, 0], pts[:, 1], pts[:, 2]),
        rtol=0, atol=1e-15,
    )
    with pytest.raises(ValueError, match="unit"):
        g1.rotated((0.5, 0.5))


def test_rotation_places_first_axis_along_zeta():
    # zeta = (0, 1): the base point is x1*zeta + x2*(-zeta2, zeta1) = (-x2, x1)
    rot = coeffs.builtin_field("g1").rotated((0.0, 1.0))
    assert rot.value(0.0, -0.25, 0.0) == pytest.approx(3.0)
    assert rot.value(0.0, 0.25, 0.0) == pytest.approx(1.0)


def test_double_rotation_roundtrip():
    g2 = coeffs.builtin_field("g2")
    theta = 0.63
    zeta = (math.cos(theta), math.sin(theta))
    inverse = (zeta[0], -zeta[1])
    round_trip = g2.rotated(zeta).rotated(inverse)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-2, 2, (100, 3))
    a = round_trip.value(pts[:, 0], pts[:, 1], pts[:, 2])
    b = g2.value(pts[:, 0], pts[:, 1], pts[:, 2])
    assert np.max(np.abs(a - b)) <= 1e-12


def test_transforms_leave_original_unchanged():
    g1 = coeffs.builtin_field("g1")
    g1.rotated((0.0, 1.0))
    g1.rescaled(0.25)
    assert np.allclose(g1.frame, np.eye(2))
    assert g1.scale == 1.0


def test_rescale_validation():
    with pytest.raises(ValueError):
        coeffs.builtin_field("g1").rescaled(0.0)
    with pytest.raises(ValueError):
        coeffs.builtin_field("g1").rescaled(-1.0)


def test_grid_sampler_matches_field():
    g = coeffs.builtin_field("g3").rotated((0.6, 0.8)).rescaled(0.125)
    M = 16
    sampler = GridSampler(g, M)
    h = 1.0 / M
    x1 = (np.arange(M) * h)[:, None]
    x2 = (np.arange(M) * h)[None, :]
    for t in (0.0, 0.137, 0.89):
        assert np.allclose(sampler.values(t), g.value(x1, x2, t), rtol=0, atol=1e-12)
        assert np.allclose(sampler.dt_inv(t), g.dt_inv(x1, x2, t), rtol=1e-12, atol=1e-9)


def test_wave_requires_integer_wavevector():
    with pytest.raises(ValueError, match="integer"):
        Wave("sin", 0.5, 0, 1)
    with pytest.raises(ValueError, match="kind"):
        Wave("tan", 1, 0, 1)


class TestParser:
    def test_builtin_names(self):
        for name in CATALOG:
            f = coeffs.parse_coefficient(name)
            g = coeffs.builtin_field(name)
            assert f.value(0.3, 0.7, 0.2) == pytest.approx(g.value(0.3, 0.7, 0.2))

    def test_traveling_wave_forms(self):
        assert coeffs.parse_coefficient("tw(2)").value(0.25, 0, 0) == pytest.approx(3.0)
        plus = coeffs.parse_coefficient("tw(2,+1)")
        minus = coeffs.parse_coefficient("tw(2,-1)")
        assert plus.value(0.1, 0, 0.2) == pytest.approx(
            math.sin(2 * math.pi * 0.3) + 2
        )
        assert minus.value(0.1, 0, 0.2) == pytest.approx(
            math.sin(-2 * math.pi * 0.1) + 2
        )

    def test_expression_grammar(self):
        f = coeffs.parse_coefficient("2 + 1*sin(1,0,1)")
        g = coeffs.builtin_field("g1")
        assert f.value(0.3, 0.1, 0.6) == pytest.approx(g.value(0.3, 0.1, 0.6))
        f3 = coeffs.parse_coefficient(
            "2 + 0.5*cos(0,0,1)*sin(1,0,0) + 0.5*cos(0,0,1)*sin(0,1,0)"
        )
        g3 = coeffs.builtin_field("g3")
        assert f3.value(0.9, 0.4, 0.7) == pytest.approx(g3.value(0.9, 0.4, 0.7))

    def test_negative_terms_and_spaces(self):
        f = coeffs.parse_coefficient(" 3 - 1*sin(1,0,-1) ")
        assert f.value(0.25, 0.0, 0.0) == pytest.approx(2.0)

    def test_garbage_rejected(self):
        for bad in ("2 + sin(0.5,0,1)", "nope(1,2,3)", "2 + 1*sin(1,0)", "2 + * 3"):
            with pytest.raises(ValueError):
                coeffs.parse_coefficient(bad)
