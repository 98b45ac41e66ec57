import math
import threading

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessel_ratio_bounds.errors import (
    ConvergenceFailure,
    NonFiniteInput,
    NumericError,
    ParameterError,
    UnsupportedParameterRange,
)
from bessel_ratio_bounds.ratio_engine import (
    CF_BUDGET,
    RatioKind,
    eval_ratio,
    eval_ratio_oracle,
    expansion_at_infinity,
    expansion_at_zero,
    ratio_mp,
    zero_terms_available,
)

I, K = RatioKind.FirstKind, RatioKind.SecondKind


def mp_ratio(kind, nu, x, dps=40):
    with mpmath.workdps(dps):
        if kind is I:
            return mpmath.besseli(nu - 1, x) / mpmath.besseli(nu, x)
        return mpmath.besselk(nu + 1, x) / mpmath.besselk(nu, x)


def rel(a, b):
    return abs(float(a) / float(b) - 1.0)


class TestExamples:
    def test_first_kind_half_is_coth(self):
        assert eval_ratio(I, 0.5, 1.0).value == pytest.approx(1.3130352854993312, rel=1e-15)

    def test_second_kind_half_closed_form(self):
        rv = eval_ratio(K, 0.5, 2.0)
        assert rv.value == pytest.approx(1.5, rel=1e-15)
        assert rv.phi_prime == pytest.approx(1.0, abs=1e-14)

    def test_leading_term_near_zero(self):
        rv = eval_ratio(I, 1.0, 1e-9)
        assert rv.value * 1e-9 == pytest.approx(2.0, rel=1e-12)

    def test_phi_is_x_times_value(self):
        rv = eval_ratio(K, 2.3, 0.7)
        assert rv.phi == rv.x * rv.value

    def test_kind_parsing(self):
        assert RatioKind.parse("i") is I
        assert RatioKind.parse("SecondKind") is K
        with pytest.raises(UnsupportedParameterRange):
            RatioKind.parse("J")


class TestErrors:
    @pytest.mark.parametrize("nu,x", [(math.nan, 1.0), (1.0, math.inf), (math.inf, 2.0)])
    def test_non_finite(self, nu, x):
        with pytest.raises(NonFiniteInput):
            eval_ratio(I, nu, x)

    def test_non_positive_x(self):
        with pytest.raises(UnsupportedParameterRange):
            eval_ratio(K, 1.0, 0.0)

    def test_best_effort_flag(self):
        assert eval_ratio(I, -0.3, 1.0).best_effort
        assert not eval_ratio(I, 0.3, 1.0).best_effort
        with pytest.raises(UnsupportedParameterRange):
            eval_ratio(K, -2.0, 1.0, best_effort=False)

    def test_budget_exhaustion_is_a_numeric_error(self):
        # the first-kind fraction needs about x steps before it converges
        with pytest.raises(ConvergenceFailure):
            eval_ratio(I, 0.0, 50.0 * CF_BUDGET**2)

    def test_error_hierarchy(self):
        assert issubclass(UnsupportedParameterRange, ParameterError)
        assert issubclass(ConvergenceFailure, NumericError)
        assert issubclass(ParameterError, ValueError)


@pytest.mark.parametrize("kind", [I, K])
@pytest.mark.parametrize("nu", [0.0, 0.3, 1.0, 2.5, 17.0, 100.0])
def test_against_mpmath(kind, nu):
    worst = 0.0
    for x in np.geomspace(1e-6, 1e6, 37):
        worst = max(worst, rel(eval_ratio(kind, nu, float(x)).value, mp_ratio(kind, nu, float(x))))
    assert worst <= 1e-13


@pytest.mark.parametrize("kind", [I, K])
def test_error_estimate_covers_actual_error(kind):
    for nu in (0.25, 3.0, 40.0):
        for x in np.geomspace(1e-3, 1e4, 15):
            rv = eval_ratio(kind, nu, float(x))
            assert rel(rv.value, mp_ratio(kind, nu, float(x))) <= max(rv.est_rel_error, 4e-16)


@settings(max_examples=60, deadline=None)
@given(
    nu=st.floats(min_value=0.0, max_value=60.0),
    x=st.floats(min_value=1e-4, max_value=1e4),
)
def test_recurrence_both_kinds(nu, x):
    fi = eval_ratio(I, nu, x).value
    assert fi == pytest.approx(2 * nu / x + 1 / eval_ratio(I, nu + 1, x).value, rel=1e-12)
    fk = eval_ratio(K, nu, x).value
    assert fk == pytest.approx(2 * nu / x + 1 / eval_ratio(K, nu - 1, x).value, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(min_value=0.0, max_value=50.0), x=st.floats(min_value=1e-3, max_value=1e3))
def test_second_kind_exceeds_first_kind(nu, x):
    assert eval_ratio(K, nu, x).value > eval_ratio(I, nu, x).value


@pytest.mark.parametrize("kind", [I, K])
def test_riccati_against_finite_differences(kind):
    """x phi' from central differences (h = 1e-5 x) against the Riccati right side.

    The residual is relative to x^2 + 2 nu phi + phi^2, the size of the
    terms being balanced. Differences are taken in extended precision so
    that only the step's truncation error remains.
    """
    sign = 1.0 if kind is I else -1.0
    for nu in (0.5, 1.0, 4.0):
        for x in (0.05, 0.7, 3.0, 25.0):
            h = x * 1e-5
            ctx = mpmath.mp.clone()
            ctx.dps = 40
            plus, _ = ratio_mp(kind, nu, ctx.mpf(x) + h, 40)
            minus, _ = ratio_mp(kind, nu, ctx.mpf(x) - h, 40)
            fd = float((plus - minus) / (2 * h))
            phi = eval_ratio(kind, nu, x).phi
            rhs = sign * (x * x + 2 * nu * phi - phi * phi)
            assert abs(x * fd - rhs) <= 1e-11 * (x * x + 2 * nu * phi + phi * phi)


def test_phi_prime_bracket():
    # phi' comes out of a cancelling Riccati balance, so the upper end is
    # checked against the propagated error bound
    for kind in (I, K):
        for nu in (0.5, 0.75, 2.0, 12.0):
            for x in np.geomspace(1e-3, 1e3, 61):
                rv = eval_ratio(kind, nu, float(x))
                assert 0.0 < rv.phi_prime <= 1.0 + rv.phi_prime_abs_error


def test_negative_second_kind_orders_reflect():
    # K_{-nu} = K_nu, so Phi_K(nu) = 1 / Phi_K(-nu-1)
    for nu in (-0.7, -3.2):
        for x in (0.2, 5.0):
            assert eval_ratio(K, nu, x).value == pytest.approx(float(mp_ratio(K, nu, x)), rel=1e-13)


def test_concurrent_use_is_consistent():
    points = [(k, nu, x) for k in (I, K) for nu in (0.1, 2.2) for x in (0.3, 3.0, 30.0)]
    expected = [eval_ratio(*p).value for p in points]
    results: list[list[float]] = []

    def work():
        results.append([eval_ratio(*p).value for p in points])

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == expected for r in results)


class TestOracle:
    def test_coth(self):
        with mpmath.workdps(40):
            assert abs(eval_ratio_oracle(I, 0.5, 1.0, 30) - mpmath.coth(1)) < mpmath.mpf(10) ** -30

    def test_second_kind_half(self):
        val = eval_ratio_oracle(K, 0.5, 3.0, 30)
        with mpmath.workdps(40):
            assert abs(val - mpmath.mpf(4) / 3) < mpmath.mpf(10) ** -30

    def test_integer_order_quadrature(self):
        val = eval_ratio_oracle(K, 2.0, 1.5, 25)
        assert rel(val, mp_ratio(K, 2.0, 1.5)) < 1e-15

    def test_matches_engine(self):
        assert rel(eval_ratio_oracle(I, 2.0, 0.1, 20), eval_ratio(I, 2.0, 0.1).value) < 1e-13

    @pytest.mark.parametrize("args", [(I, 1.0, 60.0, 20), (K, 25.0, 1.0, 20), (I, 1.0, 1.0, 45)])
    def test_limits(self, args):
        with pytest.raises(UnsupportedParameterRange):
            eval_ratio_oracle(*args)


class TestExpansions:
    def test_first_kind_at_zero(self):
        assert expansion_at_zero(I, 1.0, 3) == pytest.approx([2.0, 0.25, -1 / 96])
        assert expansion_at_zero(I, 0.0, 1) == [0.0]

    def test_second_kind_at_zero(self):
        assert expansion_at_zero(K, 2.0, 2) == pytest.approx([4.0, 0.5])
        with pytest.raises(UnsupportedParameterRange):
            expansion_at_zero(K, 1.0, 2)
        with pytest.raises(UnsupportedParameterRange):
            expansion_at_zero(K, 2.0, 3)

    def test_at_infinity(self):
        assert expansion_at_infinity(I, 0.5) == [1.0, 0.0, 0.0, 0.0]
        assert expansion_at_infinity(K, 0.5) == [1.0, 1.0, 0.0, -0.0]
        assert expansion_at_infinity(K, 1.5) == pytest.approx([1.0, 2.0, 1.0, -1.0])

    def test_terms_available(self):
        assert [zero_terms_available(K, v) for v in (-1, 0.5, 1.5, 2.5)] == [0, 1, 2, 3]

    @pytest.mark.parametrize("kind,nu", [(I, 1.3), (K, 3.4)])
    def test_small_x_ladder_matches_values(self, kind, nu):
        c = expansion_at_zero(kind, nu, 3)
        x = 1e-2
        approx = c[0] / x + c[1] * x + c[2] * x**3
        assert rel(approx, eval_ratio(kind, nu, x).value) < 1e-9

    @pytest.mark.parametrize("kind", [I, K])
    def test_large_x_ladder_matches_values(self, kind):
        w = expansion_at_infinity(kind, 2.0)
        x = 1e3
        approx = sum(wk / x**k for k, wk in enumerate(w))
        assert rel(approx, eval_ratio(kind, 2.0, x).value) < 1e-11
