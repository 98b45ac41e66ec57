import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessel_ratio_bounds.bound_catalog import BoundCoefficients, Side, eval_bound, lookup
from bessel_ratio_bounds.close_to_best import (
    BLK,
    BNK,
    FAMILIES,
    HORN,
    IU,
    FamilySpec,
    Quadratic,
    SharpEnd,
    beta_i,
    beta_k,
    c_i,
    c_k,
    close_to_best_coeffs,
    family_by_sharp_end,
    family_for,
    q_polynomial,
    r_polynomial,
)
from bessel_ratio_bounds.errors import NegativeRadicand, UnsupportedParameterRange
from bessel_ratio_bounds.ratio_engine import RatioKind
from bessel_ratio_bounds.verification import verify_inequality

from support import coeffs_close, family_orders

I, K = RatioKind.FirstKind, RatioKind.SecondKind


class TestSpecs:
    def test_lookup_helpers(self):
        assert family_for("I", "lower") is HORN
        assert family_for(K, Side.Upper) is BNK
        assert family_by_sharp_end("I", "0") is IU
        assert family_by_sharp_end(K, SharpEnd.AtZero) is BLK

    def test_inconsistent_sharp_end_rejected(self):
        with pytest.raises(UnsupportedParameterRange):
            FamilySpec(I, Side.Lower, SharpEnd.AtZero, (0.0, 0.5), "bad")

    def test_ladder(self):
        lad = IU.lambda_ladder()
        assert len(lad) == 11 and lad[0] == 0.5 and lad[-1] == 2.0


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda f: f.name)
def test_endpoints_reproduce_rows(spec, rng):
    lo_nu = 2.0 if spec is BLK else 0.5
    for nu in rng.uniform(lo_nu + 1e-3, 30.0, size=20):
        for lam, (n, m) in spec.endpoint_rows.items():
            row = lookup(spec.kind, n, m)
            assert coeffs_close(close_to_best_coeffs(spec, nu, lam), row.coeffs_of_nu(nu), 1e-14)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda f: f.name)
@pytest.mark.parametrize("nu", [1.0, 5.0])
def test_family_holds(spec, nu):
    for lam in spec.lambda_ladder(6):
        if spec is BLK and nu < lam:
            continue
        rep = verify_inequality(spec.kind, spec.side, close_to_best_coeffs(spec, nu, float(lam)), nu)
        assert rep.holds, (lam, rep.violations[:2])


def test_domain_minimum_orders_hold():
    for spec in FAMILIES:
        nu = family_orders(spec)[0]
        for lam in spec.lambda_ladder():
            if spec is BLK and nu < lam:
                continue
            coeffs = close_to_best_coeffs(spec, nu, float(lam))
            assert verify_inequality(spec.kind, spec.side, coeffs, nu).holds


class TestCoefficients:
    def test_beta_k_can_be_negative_in_range(self):
        # nu >= 1/2 - lambda holds, yet the signed beta is below zero
        assert beta_k(0.6, 0.4) < 0
        c = close_to_best_coeffs(BNK, 0.6, 0.4)
        assert c.beta == -beta_k(0.6, 0.4)
        assert verify_inequality(K, Side.Upper, c, 0.6).holds

    def test_blk_corner(self):
        assert c_k(0.5, 0.5) == 1.0
        assert close_to_best_coeffs(BLK, 0.5, 0.5) == BoundCoefficients(1.0, 0.0, 1.0)

    def test_domain_errors(self):
        with pytest.raises(UnsupportedParameterRange):
            close_to_best_coeffs(HORN, 1.0, 0.7)
        with pytest.raises(UnsupportedParameterRange):
            close_to_best_coeffs(HORN, 0.2, 0.1)
        with pytest.raises(UnsupportedParameterRange):
            close_to_best_coeffs(BLK, 1.0, 1.5)
        with pytest.raises(NegativeRadicand):
            close_to_best_coeffs(HORN, 0.1, 0.9, extended=True)

    def test_c_k_denominator_guard(self):
        with pytest.raises(UnsupportedParameterRange):
            c_k(0.3, 0.5)

    def test_c_i_values(self):
        assert c_i(1.0, 0.5) == pytest.approx(1.0)
        assert c_i(1.0, 2.0) == pytest.approx(1.5)

    @pytest.mark.parametrize("spec", [HORN, BNK], ids=lambda f: f.name)
    @pytest.mark.parametrize("nu", [1.0, 3.0])
    def test_beyond_domain_is_less_sharp(self, spec, nu):
        half = close_to_best_coeffs(spec, nu, 0.5)
        wide = close_to_best_coeffs(spec, nu, 0.7, extended=True)
        assert verify_inequality(spec.kind, spec.side, wide, nu).holds
        for x in np.geomspace(1e-3, 1e3, 121):
            x = float(x)
            diff = eval_bound(half, x) - eval_bound(wide, x)
            assert (diff >= 0) if spec.side is Side.Lower else (diff <= 0)


class TestQuadratic:
    def test_orderings(self):
        q = Quadratic(1.0, 2.0, 3.0)
        assert q.ascending() == (1.0, 2.0, 3.0)
        assert q.descending() == (3.0, 2.0, 1.0)
        assert q(2.0) == q.as_numpy()(2.0) == 17.0

    def test_roots(self):
        assert Quadratic(2.0, -3.0, 1.0).real_roots() == pytest.approx((1.0, 2.0))
        assert Quadratic(1.0, 0.0, 1.0).real_roots() == ()
        assert Quadratic(-4.0, 2.0, 0.0).real_roots() == (2.0,)

    def test_r_descending_form(self):
        c, nu, lam = 1.3, 1.0, 1.0
        assert r_polynomial(c, nu, lam).descending() == (c - 1, c * (nu - lam + 1) - nu - lam, c * (nu + lam))

    def test_double_root_at_c_i(self):
        nu, lam = 1.0, 1.0
        r = r_polynomial(c_i(nu, lam), nu, lam)
        assert abs(r.discriminant) < 1e-12
        sigma = (nu + lam) / (math.sqrt(2 * lam) - 1)
        assert r.real_roots() == pytest.approx((sigma, sigma), rel=1e-6)

    def test_linear_at_c_one(self):
        assert r_polynomial(1.0, 1.0, 1.0).degree == 1

    def test_two_roots_above_nu_plus_lambda(self):
        nu, lam = 1.0, 1.0
        lo, hi = max(1.0, (nu + lam) / (nu + 1)), c_i(nu, lam)
        roots = r_polynomial(0.5 * (lo + hi), nu, lam).real_roots()
        assert len(roots) == 2 and min(roots) > nu + lam

    @settings(max_examples=100, deadline=None)
    @given(nu=st.floats(0.0, 30.0), lam=st.floats(0.51, 1.99), t=st.floats(0.0, 0.999))
    def test_discriminant_positive_below_c_i(self, nu, lam, t):
        c = t * c_i(nu, lam)
        assert r_polynomial(c, nu, lam).discriminant > 0

    @settings(max_examples=100, deadline=None)
    @given(nu=st.floats(0.0, 30.0), lam=st.floats(0.51, 1.99), t=st.floats(0.001, 0.999))
    def test_r_roots_exceed_nu_plus_lambda(self, nu, lam, t):
        lo, hi = max(1.0, (nu + lam) / (nu + 1)), c_i(nu, lam)
        c = lo + t * (hi - lo)
        roots = r_polynomial(c, nu, lam).real_roots()
        assert len(roots) == 2
        assert min(roots) > nu + lam

    @settings(max_examples=100, deadline=None)
    @given(lam=st.floats(0.01, 0.49), extra=st.floats(0.01, 20.0), t=st.floats(0.001, 0.999))
    def test_q_roots_exceed_beta(self, lam, extra, t):
        nu = lam + 0.5 + extra
        lo, hi = nu - lam - 0.5, beta_k(nu, lam)
        beta = lo + t * (hi - lo)
        roots = q_polynomial(nu + lam + 0.5, beta, nu).real_roots()
        assert len(roots) == 2
        assert min(roots) > beta > 0

    def test_root_collapse(self):
        nu = 0.8
        lams = np.linspace(0.1, nu - 0.5 - 1e-4, 11)
        largest = []
        for lam in lams:
            roots = q_polynomial(nu + lam + 0.5, beta_k(nu, lam), nu).real_roots()
            largest.append(max(roots))
        assert all(b < a for a, b in zip(largest, largest[1:]))
        assert largest[-1] < 1e-3

    def test_beta_i_exceeds_beta_k(self):
        assert beta_i(2.0, 0.3) > beta_k(2.0, 0.3)
