"""Osculatory (best) bounds: tangent to the ratio at a chosen point x*.

Two shapes are used, written in terms of phi = x * ratio:

* sharp at infinity:  phi ~ a + sqrt(b + x^2)               (gamma = 1)
* sharp at zero:      phi ~ nu - t + sqrt((nu + t)^2 + c x^2)  (alpha + beta = 2 nu)

where t = lambda for the first kind and t = -lambda for the second kind.
Matching value and slope at x* fixes the two free coefficients. The
algebra cancels heavily for small and large x*, so it runs in mpmath
with a precision that grows with |log10 x*|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bound_catalog import BoundCoefficients, Side, bound_derivative, eval_bound
from .close_to_best import SharpEnd, family_by_sharp_end, q_polynomial, r_polynomial
from .errors import (
    BesselRatioError,
    BracketFailure,
    ConvergenceFailure,
    DenominatorNearZero,
    DerivativeOutOfRange,
    NonFiniteInput,
    UnsupportedParameterRange,
)
from .ratio_engine import RatioKind, eval_ratio, ratio_mp
from .verification import STANDARD_GRID, GridSpec, VerificationReport, verify_inequality

VALUE_TOL = 1e-11
SLOPE_TOL = 1e-10
LAMBDA_TOL = 1e-12
MAX_BISECTIONS = 200
SWEEP_MIN, SWEEP_MAX = 1e-8, 1e8
ROOT_MATCH_TOL = 1e-8
REFINED_POINTS = 200


@dataclass(frozen=True)
class TangencySolution:
    kind: RatioKind
    sharp_end: SharpEnd
    nu: float
    x_star: float
    coeffs: BoundCoefficients
    value_residual: float
    slope_residual: float
    lambda_equiv: float
    valid: bool
    side: Side
    matched_root: str | None = None

    @property
    def b_star(self) -> float:
        """Radicand constant for infinity-sharp solutions (beta^2)."""
        return self.coeffs.beta**2

    @property
    def c_star(self) -> float:
        """Radicand slope for zero-sharp solutions (gamma^2)."""
        return self.coeffs.gamma**2

    def residuals_ok(self) -> bool:
        rv = eval_ratio(self.kind, self.nu, self.x_star)
        return abs(self.value_residual) <= VALUE_TOL * max(1.0, rv.value) and abs(
            self.slope_residual
        ) <= SLOPE_TOL * max(1.0, abs(rv.derivative))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sharp_end": self.sharp_end.value,
            "nu": self.nu,
            "x_star": self.x_star,
            "side": self.side.value,
            **self.coeffs.to_dict(),
            "value_residual": self.value_residual,
            "slope_residual": self.slope_residual,
            "lambda_equiv": self.lambda_equiv,
            "valid": self.valid,
            "matched_root": self.matched_root,
        }


def _working_dps(x: float) -> int:
    lg = math.log10(x)
    return 40 + 4 * max(0, math.ceil(-lg)) + 3 * max(0, math.ceil(lg))


def _check_inputs(nu: float, x_star: float) -> tuple[float, float]:
    nu, x_star = float(nu), float(x_star)
    if not (math.isfinite(nu) and math.isfinite(x_star)):
        raise NonFiniteInput("nu and x_star must be finite")
    if x_star <= 0:
        raise UnsupportedParameterRange(f"x_star must be positive, got {x_star}")
    return nu, x_star


def _residuals(kind: RatioKind, nu: float, x: float, coeffs: BoundCoefficients) -> tuple[float, float]:
    rv = eval_ratio(kind, nu, x)
    return eval_bound(coeffs, x) - rv.value, bound_derivative(coeffs, x) - rv.derivative


def _infinity_window(kind: RatioKind, nu: float, lam: float) -> bool:
    if not math.isfinite(lam):
        return False
    if kind is RatioKind.FirstKind:
        return 0 < lam < 0.5 and nu >= 0.5 - lam
    return nu > 0.5 and 0 < lam < min(0.5, nu - 0.5)


def _zero_window(kind: RatioKind, nu: float, lam: float) -> bool:
    if not (math.isfinite(lam) and 0.5 < lam < 2):
        return False
    if kind is RatioKind.FirstKind:
        return nu >= 0
    # nu in [lambda, 2) is left open by the theory, so only nu >= 2 counts as guaranteed
    return nu >= 2


def osculatory_at_infinity(kind: RatioKind | str, nu: float, x_star: float) -> TangencySolution:
    """Bound sharp at infinity and tangent to the ratio at x_star.

    With p = phi'(x*): a = phi(x*) - x*/p and b = x*^2 (p^-2 - 1); the
    bound is (a + sqrt(b + x^2))/x. The implied lambda is nu - 1/2 - a for
    the first kind and a - nu - 1/2 for the second.
    """
    kind = RatioKind.parse(kind)
    nu, x_star = _check_inputs(nu, x_star)
    if nu < 0.5:
        raise UnsupportedParameterRange(f"infinity-sharp osculatory bounds need nu >= 1/2, got {nu}")
    dps = _working_dps(x_star)
    phi, p = ratio_mp(kind, nu, x_star, dps)
    if not (0 < p <= 1 + 1e-12):
        raise DerivativeOutOfRange(f"phi'({x_star}) = {float(p)} is outside (0, 1]")
    a = phi - x_star / p
    b = x_star**2 * (1 / (p * p) - 1)
    if b < 0:
        if b < -1e-10 * max(1.0, x_star**2):
            raise DerivativeOutOfRange(f"b* = {float(b)} < 0 at x*={x_star}")
        b = b * 0
    coeffs = BoundCoefficients(float(a), math.sqrt(float(b)), 1.0)
    lam = float(nu - 0.5 - a) if kind is RatioKind.FirstKind else float(a - nu - 0.5)
    vres, sres = _residuals(kind, nu, x_star, coeffs)
    side = Side.Lower if kind is RatioKind.FirstKind else Side.Upper
    return TangencySolution(
        kind, SharpEnd.AtInfinity, nu, x_star, coeffs, vres, sres, lam, _infinity_window(kind, nu, lam), side
    )


def zero_lambda_explicit(kind: RatioKind | str, nu, x_star, phi):
    """Closed-form lambda* and c* written in phi* = phi(x*), as rational expressions.

    For the second kind the same expressions apply with nu -> -nu and
    phi* -> -phi*. Kept separate from the solver as an independent check.
    """
    kind = RatioKind.parse(kind)
    if kind is RatioKind.SecondKind:
        nu, phi = -nu, -phi
    x2 = x_star * x_star
    den = phi * phi + 2 * (1 - nu) * phi - x2 - 4 * nu
    lam = -(phi**3 + (1 - 3 * nu) * phi**2 + (2 * nu * (nu - 1) - x2) * phi + nu * x2) / den
    c = -((phi * phi - 2 * nu * phi - x2) * (phi - 2 * nu) ** 2) / (x2 * den)
    return lam, c


def osculatory_at_zero(kind: RatioKind | str, nu: float, x_star: float) -> TangencySolution:
    """Bound sharp at zero (alpha + beta = 2 nu) and tangent to the ratio at x_star.

    Writing u = phi - nu and p = phi'(x*), the contact conditions give
    t = (nu^2 + x p u - u^2) / (2u - 2nu - x p) and c = p (u + t) / x,
    with coefficients (nu - t, |nu + t|, sqrt(c)).
    """
    kind = RatioKind.parse(kind)
    nu, x_star = _check_inputs(nu, x_star)
    if nu < 0:
        raise UnsupportedParameterRange(f"zero-sharp osculatory bounds need nu >= 0, got {nu}")
    dps = _working_dps(x_star)
    phi, p = ratio_mp(kind, nu, x_star, dps)
    u = phi - nu
    xp = x_star * p
    num = nu * nu + xp * u - u * u
    den = 2 * u - 2 * nu - xp
    if abs(den) <= 1e-13 * abs(num) or den == 0:
        raise DenominatorNearZero(f"tangency denominator vanishes at x*={x_star} (nu={nu})")
    t = num / den
    c = p * (u + t) / x_star
    if c <= 0:
        raise DerivativeOutOfRange(f"c* = {float(c)} <= 0 at x*={x_star}")
    coeffs = BoundCoefficients(float(nu - t), abs(float(nu + t)), math.sqrt(float(c)))
    lam = float(t) if kind is RatioKind.FirstKind else float(-t)
    vres, sres = _residuals(kind, nu, x_star, coeffs)
    side = Side.Upper if kind is RatioKind.FirstKind else Side.Lower
    return TangencySolution(
        kind, SharpEnd.AtZero, nu, x_star, coeffs, vres, sres, lam, _zero_window(kind, nu, lam), side
    )


def osculatory(kind: RatioKind | str, sharp_end: SharpEnd | str, nu: float, x_star: float) -> TangencySolution:
    if SharpEnd.parse(sharp_end) is SharpEnd.AtInfinity:
        return osculatory_at_infinity(kind, nu, x_star)
    return osculatory_at_zero(kind, nu, x_star)


def tangency_quadratic_points(sol: TangencySolution) -> list[float]:
    """x-values where the bound's contact quadratic vanishes.

    Sharp at infinity the quadratic is Q(s) with s = sqrt(b + x^2); sharp at
    zero it is R(s) with s = sqrt((nu + lambda)^2 + c x^2). The mirrored kind
    uses the same polynomial with (alpha, nu) -> (-alpha, -nu), resp. nu -> -nu,
    evaluated at -s.
    """
    nu, a, beta, g = sol.nu, sol.coeffs.alpha, sol.coeffs.beta, sol.coeffs.gamma
    first = sol.kind is RatioKind.FirstKind
    if sol.sharp_end is SharpEnd.AtInfinity:
        if first:
            roots = [-r for r in q_polynomial(-a, beta, -nu).real_roots()]
        else:
            roots = list(q_polynomial(a, beta, nu).real_roots())
        xs = [r * r - beta * beta for r in roots if r > 0]
    else:
        lam, c = sol.lambda_equiv, g * g
        if first:
            roots = list(r_polynomial(c, nu, lam).real_roots())
        else:
            roots = [-r for r in r_polynomial(c, -nu, lam).real_roots()]
        xs = [(r * r - beta * beta) / c for r in roots if r > 0]
    return sorted(math.sqrt(v) for v in xs if v > 0)


def _match_root(sol: TangencySolution) -> str | None:
    xs = tangency_quadratic_points(sol)
    for idx, x in enumerate(xs):
        if abs(x - sol.x_star) <= ROOT_MATCH_TOL * sol.x_star:
            if len(xs) == 1:
                return "double"
            return "smaller" if idx == 0 else "larger"
    return None


def _lambda_domain_open(kind: RatioKind, sharp_end: SharpEnd, nu: float) -> tuple[float, float]:
    fam = family_by_sharp_end(kind, sharp_end)
    lo, hi = fam.lambda_domain
    if kind is RatioKind.SecondKind and sharp_end is SharpEnd.AtInfinity:
        hi = min(0.5, nu - 0.5)
    return lo, hi


def solve_x_star_from_lambda(
    kind: RatioKind | str, sharp_end: SharpEnd | str, nu: float, lam: float
) -> TangencySolution:
    """Find the tangency point whose osculatory bound has parameter lambda.

    lambda(x*) is decreasing, so a geometric sweep x = 1e-8 * 2^k brackets
    the target and bisection in log x finishes the job. The result is
    cross-checked against the roots of the contact quadratic.
    """
    kind, sharp_end = RatioKind.parse(kind), SharpEnd.parse(sharp_end)
    nu, lam = float(nu), float(lam)
    if not (math.isfinite(nu) and math.isfinite(lam)):
        raise NonFiniteInput("nu and lambda must be finite")
    lo, hi = _lambda_domain_open(kind, sharp_end, nu)
    if not lo < lam < hi:
        raise UnsupportedParameterRange(f"lambda={lam} outside the open interval ({lo:g}, {hi:g})")
    if kind is RatioKind.SecondKind and sharp_end is SharpEnd.AtInfinity and nu <= 0.5:
        raise UnsupportedParameterRange("second-kind infinity-sharp bounds need nu > 1/2")
    if kind is RatioKind.FirstKind and sharp_end is SharpEnd.AtInfinity and nu < 0.5 - lam:
        raise UnsupportedParameterRange(f"need nu >= 1/2 - lambda, got nu={nu}")
    if kind is RatioKind.SecondKind and sharp_end is SharpEnd.AtZero and nu < lam:
        raise UnsupportedParameterRange(f"need nu >= lambda, got nu={nu}")

    def f(x: float) -> float:
        return osculatory(kind, sharp_end, nu, x).lambda_equiv - lam

    prev_x, prev_f = None, None
    bracket = None
    k = 0
    while True:
        x = SWEEP_MIN * 2.0**k
        if x > SWEEP_MAX * (1 + 1e-12):
            break
        k += 1
        try:
            fx = f(x)
        except BesselRatioError:
            prev_x, prev_f = None, None
            continue
        if fx == 0:
            bracket = (x, x)
            break
        if prev_f is not None and prev_f > 0 > fx:
            bracket = (prev_x, x)
            break
        prev_x, prev_f = x, fx
    if bracket is None:
        raise BracketFailure(f"no sign change of lambda(x*) - {lam} on [1e-8, 1e8]")
    a, b = math.log(bracket[0]), math.log(bracket[1])
    best = math.exp(a)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (a + b)
        fm = f(math.exp(mid))
        best = math.exp(mid)
        if abs(fm) <= LAMBDA_TOL or b - a <= 4e-16 * max(1.0, abs(mid)):
            break
        if fm > 0:
            a = mid
        else:
            b = mid
    else:
        raise ConvergenceFailure(f"bisection for lambda={lam} did not converge")
    sol = osculatory(kind, sharp_end, nu, best)
    if abs(sol.lambda_equiv - lam) > 1e-10:
        raise ConvergenceFailure(f"lambda residual {sol.lambda_equiv - lam:.3e} exceeds 1e-10")
    return replace(sol, matched_root=_match_root(sol))


def tangent_grid(x_star: float, base: GridSpec = STANDARD_GRID) -> GridSpec:
    refined = np.geomspace(x_star / 3, 3 * x_star, REFINED_POINTS)
    return base.with_extra([*refined.tolist(), x_star])


def contact_halfwidth(x_star: float) -> float:
    return max(1e-6, 1e-4 * x_star)


def verify_global_tangent_bound(sol: TangencySolution, base: GridSpec = STANDARD_GRID) -> VerificationReport:
    """Grid check that the osculatory curve is a one-sided bound touching only at x*.

    ``min_margin`` refers to points outside the contact neighbourhood.
    """
    return verify_inequality(
        sol.kind,
        sol.side,
        sol.coeffs,
        sol.nu,
        tangent_grid(sol.x_star, base),
        contact=sol.x_star,
        contact_halfwidth=contact_halfwidth(sol.x_star),
        label=f"best {sol.kind.value} sharp at {sol.sharp_end.value}, x*={sol.x_star:g}",
    )


def limit_values(kind: RatioKind | str, sharp_end: SharpEnd | str, nu: float) -> dict[str, float]:
    """Limits of b* (sharp at infinity) or c* (sharp at zero) as x* -> 0 and x* -> infinity."""
    kind, sharp_end = RatioKind.parse(kind), SharpEnd.parse(sharp_end)
    if sharp_end is SharpEnd.AtInfinity:
        at_inf = nu * nu - 0.25
        if kind is RatioKind.FirstKind:
            at_zero = (nu + 1) ** 2
        else:
            at_zero = (nu - 1) ** 2 if nu >= 1 else 0.0
        return {"x_to_0": at_zero, "x_to_inf": at_inf}
    if kind is RatioKind.FirstKind:
        return {"x_to_0": (nu + 2) / (nu + 1), "x_to_inf": 1.0}
    return {"x_to_0": (nu - 2) / (nu - 1), "x_to_inf": 1.0}


__all__ = [
    "TangencySolution",
    "contact_halfwidth",
    "limit_values",
    "osculatory",
    "osculatory_at_infinity",
    "osculatory_at_zero",
    "solve_x_star_from_lambda",
    "tangency_quadratic_points",
    "tangent_grid",
    "verify_global_tangent_bound",
    "zero_lambda_explicit",
]
