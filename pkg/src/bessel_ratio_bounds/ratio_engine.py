"""Evaluation of the ratios I_{nu-1}(x)/I_nu(x) and K_{nu+1}(x)/K_nu(x).

Three layers live here:

* :func:`eval_ratio`, the double-precision engine used everywhere else;
* :func:`eval_ratio_oracle`, a slow extended-precision reference built
  from independent representations (ascending series, integral
  representation, reflection formula);
* the small-x and large-x expansion coefficients of both ratios.

With ``phi = x * ratio`` the two ratios satisfy the Riccati equations

    FirstKind:   x phi' = x**2 + 2 nu phi - phi**2
    SecondKind:  x phi' = phi**2 - 2 nu phi - x**2

and the engine derives ``phi_prime`` from them.
"""

from __future__ import annotations

import enum
import functools
import math
import sys
import threading
from dataclasses import dataclass

from mpmath.ctx_mp import MPContext

from .errors import (
    ConvergenceFailure,
    NonFiniteInput,
    PrecisionUnreachable,
    UnsupportedParameterRange,
)

EPS = sys.float_info.epsilon
CF_BUDGET = 10_000
_TINY = 1e-300

# Below this argument the second-kind ratio is computed from the reflection
# formula in extended precision rather than from the continued fraction.
SECOND_KIND_SWITCH_X = 1.0
_SMALL_X_DPS = 30

ORACLE_MAX_X = 50.0
ORACLE_MAX_NU = 20.0
ORACLE_MAX_DIGITS = 40


class RatioKind(enum.Enum):
    """Which ratio is meant."""

    FirstKind = "I"
    SecondKind = "K"

    @classmethod
    def parse(cls, value: "RatioKind | str") -> "RatioKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        for member in cls:
            if text in (member.value, member.name.upper()):
                return member
        raise UnsupportedParameterRange(f"unknown ratio kind {value!r}; use I or K")

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class RatioValue:
    """A ratio value together with its derivative data.

    ``phi_prime_abs_error`` propagates ``est_rel_error`` through the
    Riccati identity, which is needed when testing ``phi_prime <= 1``.
    """

    kind: RatioKind
    nu: float
    x: float
    value: float
    derivative: float
    phi: float
    phi_prime: float
    est_rel_error: float
    best_effort: bool = False

    @property
    def phi_prime_abs_error(self) -> float:
        dphi = self.est_rel_error * abs(self.phi)
        return (abs(2.0 * self.nu - 2.0 * self.phi) * dphi + 4.0 * EPS * max(self.x**2, self.phi**2)) / self.x


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise NonFiniteInput(f"{name} must be finite, got {v!r}")


def _riccati_rhs(kind: RatioKind, nu, x, phi):
    """Right-hand side of the Riccati equation, i.e. x * phi'."""
    if kind is RatioKind.FirstKind:
        return (x - phi) * (x + phi) + 2 * nu * phi
    return (phi - x) * (phi + x) - 2 * nu * phi


# ---------------------------------------------------------------------------
# double-precision engines
# ---------------------------------------------------------------------------


def _lentz_first_kind(nu: float, x: float) -> tuple[float, float, int]:
    """Modified Lentz on I_{nu-1}/I_nu = 2nu/x + 1/(2(nu+1)/x + 1/(...))."""
    f = 2.0 * nu / x
    if abs(f) < _TINY:
        f = _TINY  # also catches subnormal seeds whose reciprocal overflows
    c, d = f, 0.0
    for k in range(1, CF_BUDGET + 1):
        b = 2.0 * (nu + k) / x
        d = b + d
        d = 1.0 / (d if d != 0.0 else _TINY)
        c = b + 1.0 / c
        if c == 0.0:
            c = _TINY
        delta = c * d
        f *= delta
        if abs(delta - 1.0) <= EPS:
            return f, abs(delta - 1.0), k
    raise ConvergenceFailure(
        f"first-kind continued fraction did not converge in {CF_BUDGET} steps (nu={nu}, x={x})"
    )


def _cf2_second_kind(mu: float, x: float) -> tuple[float, float, int]:
    """K_{mu+1}/K_mu for |mu| <= 1/2 via the Steed/Temme continued fraction.

    K_{mu+1}/K_mu = (mu + 1/2 + x + (mu^2 - 1/4) h) / x with
    h = 1/(2(x+1) + (mu^2 - 9/4)/(2(x+2) + (mu^2 - 25/4)/(...))).
    """
    mu2 = mu * mu
    # Lentz state after the first convergent h = 1/b1
    d = 1.0 / (2.0 * (x + 1.0))
    h = d
    c = 1.0 / _TINY
    delta = 1.0
    for i in range(2, CF_BUDGET + 1):
        a = mu2 - (i - 0.5) ** 2
        b = 2.0 * (x + i)
        d = b + a * d
        d = 1.0 / (d if d != 0.0 else _TINY)
        c = b + a / c
        if c == 0.0:
            c = _TINY
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= EPS:
            break
    else:
        raise ConvergenceFailure(
            f"second-kind continued fraction did not converge in {CF_BUDGET} steps (mu={mu}, x={x})"
        )
    ratio = (mu + 0.5 + x + (mu2 - 0.25) * h) / x
    return ratio, abs(delta - 1.0), i


def _second_kind_cf(nu: float, x: float) -> tuple[float, float, int]:
    shift = math.floor(nu + 0.5)
    mu = nu - shift
    ratio, inc, iters = _cf2_second_kind(mu, x)
    for j in range(1, shift + 1):
        ratio = 2.0 * (mu + j) / x + 1.0 / ratio
    return ratio, inc, iters + shift


_local = threading.local()


def _ctx(dps: int) -> MPContext:
    """Thread-local mpmath context, so precision changes never leak."""
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = _local.ctx = MPContext()
    ctx.dps = dps
    return ctx


def _second_kind_reflection(nu: float, x: float) -> float:
    ctx = _ctx(_SMALL_X_DPS)
    return float(ctx.besselk(nu + 1, x) / ctx.besselk(nu, x))


@functools.lru_cache(maxsize=1 << 16)
def _eval_cached(kind: RatioKind, nu: float, x: float) -> tuple[float, float]:
    if kind is RatioKind.FirstKind:
        value, inc, iters = _lentz_first_kind(nu, x)
        # rounding in a long product behaves like a random walk
        err = inc + (5.0 + 4.0 * math.sqrt(iters)) * EPS
        return value, err
    if nu < -0.5:
        value, err = _eval_cached(kind, -nu - 1.0, x)
        return 1.0 / value, err + EPS
    if x < SECOND_KIND_SWITCH_X:
        return _second_kind_reflection(nu, x), 5.0 * EPS
    value, inc, iters = _second_kind_cf(nu, x)
    return value, inc + (5.0 + 4.0 * math.sqrt(iters)) * EPS


def guaranteed_nu_min(kind: RatioKind) -> float:
    return 0.0 if RatioKind.parse(kind) is RatioKind.FirstKind else -0.5


def eval_ratio(kind: RatioKind | str, nu: float, x: float, *, best_effort: bool = True) -> RatioValue:
    """Evaluate the ratio, its derivative and phi = x * ratio.

    Accuracy is about 1e-13 relative for x in [1e-6, 1e6] and nu in
    [0, 100]. Orders below the guaranteed range are computed anyway and
    flagged through ``best_effort`` unless ``best_effort=False``.

    >>> round(eval_ratio("K", 0.5, 2.0).value, 15)
    1.5
    """
    kind = RatioKind.parse(kind)
    nu, x = float(nu), float(x)
    _require_finite(nu=nu, x=x)
    if x <= 0.0:
        raise UnsupportedParameterRange(f"x must be positive, got {x}")
    flagged = nu < guaranteed_nu_min(kind)
    if flagged and not best_effort:
        raise UnsupportedParameterRange(
            f"nu={nu} is below the guaranteed range nu >= {guaranteed_nu_min(kind)} for {kind.value}"
        )
    value, err = _eval_cached(kind, nu, x)
    if not math.isfinite(value):
        raise ConvergenceFailure(f"non-finite ratio for kind={kind.value}, nu={nu}, x={x}")
    phi = x * value
    phi_prime = _riccati_rhs(kind, nu, x, phi) / x
    return RatioValue(
        kind=kind,
        nu=nu,
        x=x,
        value=value,
        derivative=(phi_prime - value) / x,
        phi=phi,
        phi_prime=phi_prime,
        est_rel_error=err,
        best_effort=flagged,
    )


# ---------------------------------------------------------------------------
# extended precision
# ---------------------------------------------------------------------------


def _series_sum(ctx: MPContext, mu, x):
    """sum_k (x^2/4)^k / (k! Gamma(mu+k+1)), so I_mu(x) = (x/2)^mu * sum."""
    q = x * x / 4
    total = ctx.zero
    term_scale = ctx.one
    tol = ctx.eps
    k = 0
    while True:
        term = term_scale * ctx.rgamma(mu + k + 1)
        total += term
        k += 1
        term_scale = term_scale * q / k
        if k > q and abs(term) <= tol * abs(total) and total != 0:
            # the tail is dominated by a geometric series once k > q
            break
        if k > 100_000:
            raise PrecisionUnreachable("ascending series did not terminate")
    return total


def _first_kind_series_ratio(ctx: MPContext, nu, x):
    return 2 * _series_sum(ctx, nu - 1, x) / (x * _series_sum(ctx, nu, x))


def _bessel_i_series(ctx: MPContext, mu, x):
    return (x / 2) ** mu * _series_sum(ctx, mu, x)


def ratio_mp(kind: RatioKind | str, nu, x, dps: int):
    """Return (phi, phi') in extended precision as mpmath numbers.

    Used where double precision loses too many digits, e.g. tangency
    coefficients at small x, where the algebra cancels to O(x^4).
    """
    kind = RatioKind.parse(kind)
    ctx = _ctx(dps)
    nu_m, x_m = ctx.mpf(nu), ctx.mpf(x)
    if kind is RatioKind.FirstKind:
        value = _first_kind_series_ratio(ctx, nu_m, x_m) if x <= 60 else ctx.besseli(nu_m - 1, x_m) / ctx.besseli(nu_m, x_m)
    else:
        value = ctx.besselk(nu_m + 1, x_m) / ctx.besselk(nu_m, x_m)
    phi = x_m * value
    return phi, _riccati_rhs(kind, nu_m, x_m, phi) / x_m


def _k_quadrature(ctx: MPContext, nu, x):
    """e^x K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt."""
    nu = abs(nu)
    log_budget = (ctx.dps + 15) * ctx.log(10)

    def g(t):
        return -x * (ctx.cosh(t) - 1) + nu * t

    t_peak = ctx.asinh(nu / x)
    g_peak = g(t_peak)
    width = 1 / ctx.sqrt(ctx.sqrt(x * x + nu * nu))
    step = width
    t_end = t_peak + step
    while g(t_end) > g_peak - log_budget:
        step *= 2
        t_end = t_peak + step
    pieces = 8
    points = sorted({ctx.mpf(0), t_peak, t_end, *(t_end * k / pieces for k in range(1, pieces))})
    return ctx.quad(
        lambda t: ctx.exp(-x * (ctx.cosh(t) - 1)) * ctx.cosh(nu * t), points, method="gauss-legendre"
    )


def _k_reflection(ctx: MPContext, nu, x, extra_dps: int):
    """K_nu(x) = pi/2 (I_{-nu}(x) - I_nu(x)) / sin(nu pi), with explicit cancellation budget."""
    base = ctx.dps
    with ctx.workdps(base + extra_dps):
        nu_w, x_w = ctx.mpf(nu), ctx.mpf(x)
        val = ctx.pi / 2 * (_bessel_i_series(ctx, -nu_w, x_w) - _bessel_i_series(ctx, nu_w, x_w)) / ctx.sinpi(nu_w)
    return +val


def eval_ratio_oracle(kind: RatioKind | str, nu: float, x: float, target_digits: int = 30):
    """Brute-force reference value of the ratio as an mpmath ``mpf``.

    FirstKind sums the ascending series of both Bessel functions.
    SecondKind integrates the integral representation; for non-integer
    orders it also evaluates the reflection formula and requires the two
    routes to agree to ``target_digits``.
    """
    kind = RatioKind.parse(kind)
    nu, x = float(nu), float(x)
    _require_finite(nu=nu, x=x)
    if not (0.0 < x <= ORACLE_MAX_X) or nu > ORACLE_MAX_NU or not (1 <= target_digits <= ORACLE_MAX_DIGITS):
        raise UnsupportedParameterRange(
            f"oracle needs 0 < x <= {ORACLE_MAX_X}, nu <= {ORACLE_MAX_NU}, 1 <= digits <= {ORACLE_MAX_DIGITS}"
        )
    if kind is RatioKind.FirstKind and nu < 0:
        raise UnsupportedParameterRange("first-kind oracle needs nu >= 0")
    if kind is RatioKind.SecondKind and nu < -0.5:
        raise UnsupportedParameterRange("second-kind oracle needs nu >= -1/2")

    dps = target_digits + 12
    ctx = _ctx(dps)
    nu_m, x_m = ctx.mpf(nu), ctx.mpf(x)
    tol = ctx.mpf(10) ** (-target_digits - 1)
    if kind is RatioKind.FirstKind:
        result = _first_kind_series_ratio(ctx, nu_m, x_m)
        with ctx.workdps(dps + 15):
            check = _first_kind_series_ratio(ctx, nu_m, x_m)
        if abs(result / check - 1) > tol:
            raise PrecisionUnreachable(f"series ratio unstable at nu={nu}, x={x}")
        return +result

    quad = _k_quadrature(ctx, nu_m + 1, x_m) / _k_quadrature(ctx, nu_m, x_m)
    two_nu = 2 * nu
    if two_nu == round(two_nu) and round(two_nu) % 2 == 0:
        # integer order: the reflection formula is singular, quadrature alone
        with ctx.workdps(dps + 10):
            check = _k_quadrature(ctx, nu_m + 1, x_m) / _k_quadrature(ctx, nu_m, x_m)
        if abs(quad / check - 1) > tol:
            raise PrecisionUnreachable(f"quadrature unstable at nu={nu}, x={x}")
        return +quad
    sin_digits = max(0, int(-math.log10(abs(math.sin(math.pi * nu))) + 1))
    sin_digits = max(sin_digits, int(-math.log10(abs(math.sin(math.pi * (nu + 1)))) + 1))
    extra = 10 + int(2 * x / math.log(10)) + sin_digits
    refl = _k_reflection(ctx, nu_m + 1, x_m, extra) / _k_reflection(ctx, nu_m, x_m, extra)
    if abs(quad / refl - 1) > tol:
        raise PrecisionUnreachable(
            f"second-kind oracle routes disagree at nu={nu}, x={x}: {ctx.nstr(abs(quad / refl - 1), 3)}"
        )
    return +refl


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------


def expansion_at_zero(kind: RatioKind | str, nu: float, num_terms: int = 3) -> list[float]:
    """Coefficients of x^-1, x, x^3 in the small-x expansion of the ratio.

    The second-kind ratio carries a non-analytic x^(2nu-1) term, so its
    ladder only exists up to the first power that term does not undercut.
    """
    kind = RatioKind.parse(kind)
    _require_finite(nu=nu)
    if not 1 <= num_terms <= 3:
        raise UnsupportedParameterRange("num_terms must be 1, 2 or 3")
    if kind is RatioKind.FirstKind:
        if nu < 0:
            raise UnsupportedParameterRange("first-kind expansion at 0 needs nu >= 0")
        coeffs = [2 * nu, 1 / (2 * (nu + 1)), -1 / (8 * (nu + 1) ** 2 * (nu + 2))]
        return coeffs[:num_terms]
    need = {1: (0.0, False), 2: (1.0, True), 3: (2.0, True)}[num_terms]
    floor, strict = need
    if nu < floor or (strict and nu == floor):
        raise UnsupportedParameterRange(
            f"second-kind expansion at 0 with {num_terms} terms needs nu {'>' if strict else '>='} {floor:g}"
        )
    coeffs = [2 * nu]
    if num_terms >= 2:
        coeffs.append(1 / (2 * (nu - 1)))
    if num_terms >= 3:
        coeffs.append(-1 / (8 * (nu - 1) ** 2 * (nu - 2)))
    return coeffs


def expansion_at_infinity(kind: RatioKind | str, nu: float) -> list[float]:
    """Coefficients of x^0, x^-1, x^-2, x^-3 in the large-x expansion."""
    kind = RatioKind.parse(kind)
    _require_finite(nu=nu)
    half = (nu * nu - 0.25) / 2
    if kind is RatioKind.FirstKind:
        return [1.0, nu - 0.5, half, half]
    return [1.0, nu + 0.5, half, -half]


def zero_terms_available(kind: RatioKind | str, nu: float) -> int:
    """How many small-x ladder terms exist for this order (0 if none)."""
    kind = RatioKind.parse(kind)
    if kind is RatioKind.FirstKind:
        return 3 if nu >= 0 else 0
    if nu > 2:
        return 3
    if nu > 1:
        return 2
    return 1 if nu >= 0 else 0


__all__ = [
    "RatioKind",
    "RatioValue",
    "eval_ratio",
    "eval_ratio_oracle",
    "expansion_at_zero",
    "expansion_at_infinity",
    "ratio_mp",
    "zero_terms_available",
]
