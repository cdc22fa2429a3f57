import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernloewner.bernstein import (
    BernsteinRepr,
    boundary_data,
    compose_eval,
    deriv,
    evaluate,
    is_bernstein_numeric,
    julia_check,
    rigidity_gap,
)
from bernloewner.errors import DomainError, IntegrabilityError, ParseError
from bernloewner.measure import JumpMeasure, exponential, power_law

sys.path.insert(0, os.path.dirname(__file__))
from randgen import random_bernstein, random_half_plane_points  # noqa: E402

E1 = math.exp(-1)
DELTA1 = BernsteinRepr(rho=JumpMeasure.delta(1.0))
ID = BernsteinRepr.identity()


class TestConstruction:
    def test_zero_function_rejected(self):
        with pytest.raises(DomainError):
            BernsteinRepr()

    def test_negative_coefficients_rejected(self):
        with pytest.raises(DomainError):
            BernsteinRepr(-1.0, 1.0)

    def test_non_bernstein_measure_rejected(self):
        with pytest.raises(IntegrabilityError):
            BernsteinRepr(rho=JumpMeasure(panels=[power_law(-2.5, 1.0, 0.0, 1.0)]))

    def test_json_roundtrip(self):
        f = BernsteinRepr(0.5, 2.0, JumpMeasure([(0.3, 1.0)], [exponential(1.0)]))
        assert BernsteinRepr.from_json(f.to_json()) == f

    def test_json_strict(self):
        with pytest.raises(ParseError):
            BernsteinRepr.from_json({"alpha": 1, "gamma": 2})


class TestEvaluate:
    def test_identity(self):
        assert evaluate(ID, 1 + 2j) == 1 + 2j

    def test_delta(self):
        assert evaluate(DELTA1, 1) == pytest.approx(1 - E1, abs=1e-15)

    def test_affine(self):
        assert evaluate(BernsteinRepr(2.0, 3.0), 1j) == 2 + 3j

    def test_left_half_plane_rejected(self):
        with pytest.raises(DomainError):
            evaluate(ID, -1.0)


class TestDeriv:
    def test_identity(self):
        assert deriv(ID, 3 + 1j) == 1

    def test_delta_first(self):
        assert deriv(DELTA1, 1) == pytest.approx(E1, abs=1e-15)

    def test_delta_second(self):
        assert deriv(DELTA1, 0.5, 2) == pytest.approx(-math.exp(-0.5), abs=1e-15)

    def test_third_derivative_of_stable(self):
        # f(z) = z^{1/2} = int (1 - e^{-lz}) l^{-3/2} dl / (2 sqrt(pi))
        f = BernsteinRepr(rho=JumpMeasure(panels=[power_law(-1.5, 1 / (2 * math.sqrt(math.pi)))]))
        z = 1.7
        assert evaluate(f, z) == pytest.approx(math.sqrt(z), rel=1e-11)
        assert deriv(f, z, 3) == pytest.approx(3 / 8 * z**-2.5, rel=1e-10)

    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_finite_differences(self, n):
        f = BernsteinRepr(0.2, 0.5, JumpMeasure([(0.7, 1.0)], [exponential(2.0, 1.5), power_law(-1.5, 0.3)]))
        x, h = 1.3, 1e-3
        g = lambda u: evaluate(f, u).real  # noqa: E731
        if n == 1:
            d = lambda hh: (g(x + hh) - g(x - hh)) / (2 * hh)  # noqa: E731
        else:
            d = lambda hh: (g(x + hh) - 2 * g(x) + g(x - hh)) / hh**2  # noqa: E731
        est = (4 * d(h) - d(2 * h)) / 3
        assert est == pytest.approx(deriv(f, x, n).real, rel=1e-6)


class TestBoundaryData:
    def test_identity(self):
        bd = boundary_data(ID)
        assert (bd.f0, bd.fprime0, bd.fsecond0, bd.fprime_inf) == (0, 1, 0, 1)

    def test_delta(self):
        bd = boundary_data(DELTA1)
        assert (bd.f0, bd.fprime0, bd.fsecond0, bd.fprime_inf) == (0, 1, -1, 0)

    def test_first_derivative_finite_near_zero(self):
        f = BernsteinRepr(rho=JumpMeasure(panels=[power_law(-1.5, 1.0, 0.0, 1.0)]))
        assert boundary_data(f).fprime0 == pytest.approx(2.0, rel=1e-12)

    def test_infinite_first_derivative_from_tail(self):
        f = BernsteinRepr(rho=JumpMeasure(panels=[power_law(-1.5, 1.0, 1.0)]))
        assert boundary_data(f).fprime0 == math.inf


class TestJulia:
    def test_affine(self):
        ratio, ok = julia_check(BernsteinRepr(1.0, 1.0), [1, 1 + 10j, 100])
        assert ratio == pytest.approx(1.01) and ok

    def test_identity(self):
        ratio, ok = julia_check(ID, [0.1 + 5j, 3, 7 - 2j])
        assert ratio == 1.0 and ok

    def test_delta(self):
        ratio, ok = julia_check(DELTA1, [0.01])
        assert ratio == pytest.approx((1 - math.exp(-0.01)) / 0.01) and ok


class TestRigidity:
    def test_identity(self):
        assert rigidity_gap(ID, 3 - 2j) == 0.0

    def test_delta(self):
        assert rigidity_gap(DELTA1, 1) == pytest.approx(0.5 - E1, abs=1e-15)

    def test_saturation(self):
        assert rigidity_gap(BernsteinRepr(0.5, 1.0), 1j) == pytest.approx(0.0, abs=1e-15)

    def test_infinite_data_rejected(self):
        f = BernsteinRepr(rho=JumpMeasure(panels=[power_law(-1.5, 1.0)]))
        with pytest.raises(DomainError):
            rigidity_gap(f, 1.0)


class TestCompose:
    def test_identity_outer(self):
        assert compose_eval(ID, DELTA1, 2.0) == evaluate(DELTA1, 2.0)

    def test_linear(self):
        f = BernsteinRepr(0.0, 2.0)
        assert compose_eval(f, f, 1.0) == 4.0

    def test_nested(self):
        assert compose_eval(DELTA1, BernsteinRepr(0.0, 2.0), 1.0) == pytest.approx(1 - math.exp(-2), abs=1e-15)

    def test_composition_is_bernstein(self):
        inner = BernsteinRepr(0.1, 0.3, JumpMeasure([(1.5, 1.0)]))
        outer = BernsteinRepr(rho=JumpMeasure(panels=[power_law(-1.5, 0.5)]))
        ok, worst = is_bernstein_numeric(lambda x: compose_eval(outer, inner, x).real)
        assert ok, worst


class TestNumericMembership:
    def test_known_bernstein(self):
        ok, worst = is_bernstein_numeric(lambda x: 1 - math.exp(-x))
        assert ok

    def test_square_fails(self):
        ok, worst = is_bernstein_numeric(lambda x: x * x)
        assert not ok and worst < 0

    def test_constant(self):
        assert is_bernstein_numeric(lambda x: 1.0) == (True, 0.0)

    def test_random_reprs(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            f = random_bernstein(rng, finite_moments=False)
            ok, worst = is_bernstein_numeric(lambda x: evaluate(f, x).real, depth=6)
            assert ok, (f, worst)


def test_real_part_nonnegative():
    rng = np.random.default_rng(4)
    for _ in range(50):
        f = random_bernstein(rng, finite_moments=False)
        for z in random_half_plane_points(rng, 20, re_lo=1e-3, im=20):
            assert evaluate(f, z).real >= -1e-14


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3), st.floats(0.1, 3),
       st.complex_numbers(min_magnitude=0.01, max_magnitude=20).filter(lambda z: z.real > 0))
def test_cone_closure(c1, c2, z):
    f1 = BernsteinRepr(0.3, 0.0, JumpMeasure([(0.5, 1.0)], [exponential(1.0)]))
    f2 = BernsteinRepr(0.0, 1.0, JumpMeasure(panels=[power_law(-1.5, 0.2)]))
    comb = f1.scaled(c1) + f2.scaled(c2)
    lhs = evaluate(comb, z)
    assert abs(lhs - (c1 * evaluate(f1, z) + c2 * evaluate(f2, z))) <= 1e-12 * max(1.0, abs(lhs))
