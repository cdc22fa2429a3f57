import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernloewner.errors import DomainError, NonConvergenceError
from bernloewner.numerics import (
    DomainExit,
    ODEConfig,
    OdeResult,
    QuadratureConfig,
    adaptive_ode_step,
    alternating_differences,
    cayley,
    cayley_inv,
    gauss_legendre,
    hyperbolic_distance,
)

half_plane = st.builds(
    complex,
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=-1e3, max_value=1e3),
)


class TestConfig:
    def test_defaults(self):
        cfg = ODEConfig()
        assert (cfg.rtol, cfg.atol, cfg.max_steps) == (1e-10, 1e-12, 10**6)
        q = QuadratureConfig()
        assert (q.panel_order, q.tail_rel_tol, q.max_panels) == (16, 1e-12, 512)

    @pytest.mark.parametrize("kw", [{"rtol": 1e-15}, {"atol": 1e-17}, {"max_step": 0}, {"max_steps": 0}])
    def test_rejects_meaningless_tolerances(self, kw):
        with pytest.raises(DomainError):
            ODEConfig(**kw)

    def test_panel_order_even(self):
        with pytest.raises(DomainError):
            QuadratureConfig(panel_order=7)


@pytest.mark.parametrize("z, w", [(0, 1), (1j, 1j), (0.5, 3)])
def test_cayley_examples(z, w):
    assert cayley(z, allow_boundary=True) == pytest.approx(w, abs=1e-15)


@pytest.mark.parametrize("w, z", [(1, 0), (3, 0.5), (1j, 1j)])
def test_cayley_inv_examples(w, z):
    assert cayley_inv(w, allow_boundary=True) == pytest.approx(z, abs=1e-15)


def test_boundary_needs_opt_in():
    with pytest.raises(DomainError):
        cayley(1j)
    with pytest.raises(DomainError):
        cayley_inv(1j)
    with pytest.raises(DomainError):
        cayley(1.0, allow_boundary=True)


def test_cayley_roundtrip_grid():
    r = np.linspace(0, 0.999, 40)
    th = np.linspace(0, 2 * np.pi, 25, endpoint=False)
    worst = max(abs(cayley_inv(cayley(x * cmath.exp(1j * t))) - x * cmath.exp(1j * t)) for x in r for t in th)
    assert worst <= 1e-13


def test_cayley_domain():
    with pytest.raises(DomainError):
        cayley(1.0)
    with pytest.raises(DomainError):
        cayley_inv(-0.1)


@pytest.mark.parametrize("z, w, d", [(1, 1, 0.0), (1, math.e, 1.0), (1, math.e**2, 2.0)])
def test_hyperbolic_distance_examples(z, w, d):
    assert hyperbolic_distance(z, w) == pytest.approx(d, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(half_plane, half_plane, half_plane)
def test_triangle_inequality(a, b, c):
    assert hyperbolic_distance(a, c) <= hyperbolic_distance(a, b) + hyperbolic_distance(b, c) + 1e-12


@settings(max_examples=100, deadline=None)
@given(half_plane, half_plane, st.floats(0.01, 100), st.floats(-10, 10))
def test_distance_invariant_under_automorphisms(z, w, k, y):
    d = hyperbolic_distance(z, w)
    d2 = hyperbolic_distance(k * z + 1j * y, k * w + 1j * y)
    assert d2 == pytest.approx(d, rel=1e-7, abs=1e-9)


class TestODE:
    def test_linear_decay(self):
        res = adaptive_ode_step(lambda t, y: -y, 0.0, 1.0, 1.0)
        assert isinstance(res, OdeResult)
        assert abs(res.y - math.exp(-1)) < 1e-10

    def test_zero_rhs_is_exact(self):
        z = 0.3 + 2.7j
        assert adaptive_ode_step(lambda t, y: 0j, 0.0, 5.0, z).y == z

    def test_domain_exit(self):
        res = adaptive_ode_step(lambda t, y: -1 + 0j, 0.0, 2.0, 1.0)
        assert isinstance(res, DomainExit)
        assert abs(res.t_exit - 1.0) < 1e-9
        assert res.t_hi - res.t_lo <= 1e-10 * 1.01

    @pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
    def test_relative_error_bound(self, a):
        cfg = ODEConfig()
        y = adaptive_ode_step(lambda t, y: -a * y, 0.5, 1.5, 2 + 1j, cfg).y
        exact = math.exp(-a) * (2 + 1j)
        assert abs(y - exact) / abs(exact) <= 10 * cfg.rtol

    def test_halving_rtol_does_not_hurt(self):
        exact = math.exp(-3)
        errs = []
        for rtol in (1e-6, 5e-7, 2.5e-7, 1.25e-7, 6.25e-8):
            y = adaptive_ode_step(lambda t, y: -y, 0.0, 3.0, 1.0, ODEConfig(rtol=rtol, atol=1e-16)).y
            errs.append(abs(y - exact))
        assert all(b <= 1.5 * a for a, b in zip(errs, errs[1:]))

    def test_backward_integration(self):
        y = adaptive_ode_step(lambda t, y: -y, 1.0, 0.0, math.exp(-1)).y
        assert abs(y - 1) < 1e-9

    def test_max_steps(self):
        with pytest.raises(NonConvergenceError) as info:
            adaptive_ode_step(lambda t, y: -y, 0.0, 100.0, 1.0, ODEConfig(max_steps=3))
        assert info.value.trajectory

    def test_blow_up_reported_as_exit(self):
        # y' = y^2 from y(0) = 1 blows up at t = 1
        res = adaptive_ode_step(lambda t, y: y * y, 0.0, 2.0, 1.0)
        assert isinstance(res, DomainExit)
        assert abs(res.t_exit - 1.0) < 1e-3


class TestAlternatingDifferences:
    def test_exponential_alternates(self):
        vals = alternating_differences(lambda x: math.exp(-x), 1.0, 0.5, 3)
        assert len(vals) == 4 and all(v > 0 for v in vals)
        for k, v in enumerate(vals):
            assert v == pytest.approx(math.exp(-1) * (1 - math.exp(-0.5)) ** k, rel=1e-12)

    def test_constant(self):
        assert alternating_differences(lambda x: 7.0, 2.0, 0.3, 2) == [7.0, 0.0, 0.0]

    def test_sine_not_completely_monotone(self):
        assert min(alternating_differences(math.sin, 1.0, 1.0, 4)) < 0

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            alternating_differences(math.exp, 1.0, 0.0, 2)
        with pytest.raises(DomainError):
            alternating_differences(math.exp, 1.0, 0.1, 0)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(8)
    for k in range(16):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, abs=1e-14)
    with pytest.raises(ValueError):
        x[0] = 0.0
