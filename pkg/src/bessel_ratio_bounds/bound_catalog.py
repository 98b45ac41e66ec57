"""Algebraic bounds B(alpha, beta, gamma, x) = (alpha + sqrt(beta^2 + d x + gamma^2 x^2)) / x.

The catalog holds the nine classical bounds for each ratio, classified
by their accuracy pair (n, m): n leading terms of the small-x expansion
and m leading terms of the large-x expansion reproduced exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

from mpmath.ctx_mp import MPContext

from .errors import NegativeRadicand, NoSolution, NonFiniteInput, UnsupportedParameterRange
from .ratio_engine import RatioKind, expansion_at_infinity, expansion_at_zero, zero_terms_available


class Side(enum.Enum):
    Lower = "lower"
    Upper = "upper"

    @classmethod
    def parse(cls, value: "Side | str") -> "Side":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if text in (member.value, member.value[0]):
                return member
        raise UnsupportedParameterRange(f"unknown side {value!r}; use lower or upper")

    def flipped(self) -> "Side":
        return Side.Upper if self is Side.Lower else Side.Lower


@dataclass(frozen=True)
class BoundCoefficients:
    """Coefficients of one algebraic bound.

    ``linear_radicand`` is the coefficient d of the extra linear term used
    by the two (1, 3) bounds; it is 0 for every catalog row.
    """

    alpha: float
    beta: float
    gamma: float
    linear_radicand: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "linear_radicand"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NonFiniteInput(f"{name} must be finite, got {value!r}")
        if self.beta < 0 or self.gamma < 0:
            raise NegativeRadicand(f"beta and gamma must be >= 0, got beta={self.beta}, gamma={self.gamma}")
        if self.linear_radicand not in (-1.0, 0.0, 1.0):
            raise UnsupportedParameterRange("linear_radicand must be -1, 0 or +1")

    def radicand(self, x: float) -> float:
        return self.beta**2 + self.linear_radicand * x + self.gamma**2 * x**2

    def radicand_nonnegative_everywhere(self) -> bool:
        """True when beta^2 + d x + gamma^2 x^2 >= 0 for every x > 0."""
        d = self.linear_radicand
        if d >= 0:
            return True
        return d * d <= 4 * self.beta**2 * self.gamma**2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.linear_radicand)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "linear_radicand": self.linear_radicand}


@dataclass(frozen=True, order=True)
class AccuracyPair:
    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise UnsupportedParameterRange("accuracy orders must be non-negative")

    def __str__(self) -> str:
        return f"({self.n},{self.m})"

    def dominates(self, other: "AccuracyPair") -> bool:
        """Dominance condition for same-side bounds: both orders at least as high, sum strictly higher."""
        return self.n >= other.n and self.m >= other.m and self.n + self.m > other.n + other.m


def eval_bound(c: BoundCoefficients, x: float) -> float:
    """Evaluate the bound at x > 0.

    For alpha < 0 the numerator is rewritten as (R - alpha^2)/(sqrt(R) - alpha)
    so that small x does not cancel alpha against sqrt(R).

    >>> eval_bound(BoundCoefficients(1.0, 0.0, 1.0), 2.0)
    1.5
    """
    x = float(x)
    if not math.isfinite(x):
        raise NonFiniteInput(f"x must be finite, got {x!r}")
    if x <= 0:
        raise UnsupportedParameterRange(f"x must be positive, got {x}")
    a, b, g, d = c.as_tuple()
    r = b * b + d * x + g * g * x * x
    if r < 0:
        if r > -8 * math.ulp(max(b * b, g * g * x * x, abs(d * x))):
            r = 0.0
        else:
            raise NegativeRadicand(f"radicand {r} < 0 at x={x}")
    root = math.sqrt(r)
    if a >= 0:
        return (a + root) / x
    abs_a = -a
    reduced = (b - abs_a) * (b + abs_a) + d * x + g * g * x * x
    return reduced / (x * (root + abs_a))


def eval_bound_mp(c: BoundCoefficients, x, ctx: MPContext):
    """Same as :func:`eval_bound` in the precision of ``ctx``."""
    a, b, g, d = (ctx.mpf(v) for v in c.as_tuple())
    x = ctx.mpf(x)
    r = b * b + d * x + g * g * x * x
    if r < 0:
        raise NegativeRadicand(f"radicand < 0 at x={x}")
    return (a + ctx.sqrt(r)) / x


def bound_derivative(c: BoundCoefficients, x: float) -> float:
    """d/dx of the bound: (R'/(2 sqrt R) - B) / x."""
    r = c.radicand(x)
    if r <= 0:
        raise NegativeRadicand(f"radicand {r} <= 0 at x={x}")
    dr = c.linear_radicand + 2 * c.gamma**2 * x
    return (dr / (2 * math.sqrt(r)) - eval_bound(c, x)) / x


@dataclass(frozen=True)
class CatalogEntry:
    """One row of a bound table.

    ``nu_min`` is ``-inf`` for rows valid for every real order. The
    ``*_expr`` strings are sympy-parsable and double as documentation.
    """

    kind: RatioKind
    accuracy: AccuracyPair
    side: Side
    alpha_expr: str
    beta_expr: str
    gamma_expr: str
    nu_min: float
    nu_min_open: bool
    _coeffs: Callable[[float], tuple[float, float, float]] = field(repr=False, compare=False)

    @property
    def label(self) -> str:
        return f"{self.kind.value}{self.accuracy}"

    def in_range(self, nu: float, *, allow_endpoint: bool = False) -> bool:
        if self.nu_min_open and not allow_endpoint:
            return nu > self.nu_min
        return nu >= self.nu_min

    def coeffs_of_nu(self, nu: float, *, allow_endpoint: bool = False) -> BoundCoefficients:
        """Coefficients at order nu; raises outside the row's validity range.

        ``allow_endpoint`` admits the open endpoint for rows whose formula
        stays finite there (the bound then holds with equality).
        """
        nu = float(nu)
        if not math.isfinite(nu):
            raise NonFiniteInput(f"nu must be finite, got {nu!r}")
        if not self.in_range(nu, allow_endpoint=allow_endpoint):
            op = ">" if self.nu_min_open else ">="
            raise UnsupportedParameterRange(f"row {self.label} needs nu {op} {self.nu_min:g}, got {nu}")
        try:
            a, b, g = self._coeffs(nu)
        except (ZeroDivisionError, ValueError) as exc:
            raise UnsupportedParameterRange(f"row {self.label} is degenerate at nu={nu}") from exc
        return BoundCoefficients(a, abs(b), g)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.accuracy.n,
            "m": self.accuracy.m,
            "side": self.side.value,
            "alpha_expr": self.alpha_expr,
            "beta_expr": self.beta_expr,
            "gamma_expr": self.gamma_expr,
            "nu_min": None if math.isinf(self.nu_min) else self.nu_min,
            "nu_min_open": self.nu_min_open,
        }


_INF = -math.inf


def _row(kind, n, m, side, exprs, nu_min, nu_open, fn) -> CatalogEntry:
    return CatalogEntry(kind, AccuracyPair(n, m), side, *exprs, nu_min, nu_open, fn)


_I, _K, _L, _U = RatioKind.FirstKind, RatioKind.SecondKind, Side.Lower, Side.Upper

_TABLE_I = (
    _row(_I, 0, 1, _L, ("nu - 1", "nu - 1", "1"), 0.0, False, lambda v: (v - 1, v - 1, 1.0)),
    _row(_I, 2, 0, _L, ("nu", "nu", "sqrt(nu/(nu + 1))"), 0.0, False, lambda v: (v, v, math.sqrt(v / (v + 1)))),
    _row(_I, 0, 2, _L, ("nu - 1/2", "nu - 1/2", "1"), 0.5, False, lambda v: (v - 0.5, v - 0.5, 1.0)),
    _row(_I, 2, 1, _L, ("nu - 1", "nu + 1", "1"), 0.0, False, lambda v: (v - 1, v + 1, 1.0)),
    _row(_I, 0, 3, _L, ("nu - 1/2", "sqrt(nu**2 - 1/4)", "1"), 0.5, False,
         lambda v: (v - 0.5, math.sqrt((v - 0.5) * (v + 0.5)), 1.0)),
    _row(_I, 1, 0, _U, ("nu", "nu", "sqrt(nu/(nu - 1))"), 1.0, True, lambda v: (v, v, math.sqrt(v / (v - 1)))),
    _row(_I, 1, 1, _U, ("nu", "nu", "1"), 0.0, False, lambda v: (v, v, 1.0)),
    _row(_I, 1, 2, _U, ("nu - 1/2", "nu + 1/2", "1"), 0.0, False, lambda v: (v - 0.5, v + 0.5, 1.0)),
    _row(_I, 3, 0, _U, ("nu - 2", "nu + 2", "sqrt((nu + 2)/(nu + 1))"), 0.0, False,
         lambda v: (v - 2, v + 2, math.sqrt((v + 2) / (v + 1)))),
)

_TABLE_K = (
    _row(_K, 0, 1, _U, ("nu + 1", "nu + 1", "1"), _INF, False, lambda v: (v + 1, v + 1, 1.0)),
    _row(_K, 2, 0, _U, ("nu", "nu", "sqrt(nu/(nu - 1))"), 1.0, True, lambda v: (v, v, math.sqrt(v / (v - 1)))),
    _row(_K, 0, 2, _U, ("nu + 1/2", "nu + 1/2", "1"), -0.5, False, lambda v: (v + 0.5, v + 0.5, 1.0)),
    _row(_K, 2, 1, _U, ("nu + 1", "nu - 1", "1"), _INF, False, lambda v: (v + 1, v - 1, 1.0)),
    _row(_K, 0, 3, _U, ("nu + 1/2", "sqrt(nu**2 - 1/4)", "1"), 0.5, True,
         lambda v: (v + 0.5, math.sqrt((v - 0.5) * (v + 0.5)), 1.0)),
    _row(_K, 1, 0, _L, ("nu", "nu", "sqrt(nu/(nu + 1))"), 0.0, False, lambda v: (v, v, math.sqrt(v / (v + 1)))),
    _row(_K, 1, 1, _L, ("nu", "nu", "1"), _INF, False, lambda v: (v, v, 1.0)),
    _row(_K, 1, 2, _L, ("nu + 1/2", "nu - 1/2", "1"), 0.5, True, lambda v: (v + 0.5, v - 0.5, 1.0)),
    _row(_K, 3, 0, _L, ("nu + 2", "nu - 2", "sqrt((nu - 2)/(nu - 1))"), 2.0, False,
         lambda v: (v + 2, v - 2, math.sqrt((v - 2) / (v - 1)))),
)


def catalog(kind: RatioKind | str) -> tuple[CatalogEntry, ...]:
    """The nine table rows for the requested ratio, in table order."""
    return _TABLE_I if RatioKind.parse(kind) is RatioKind.FirstKind else _TABLE_K


def lookup(kind: RatioKind | str, n: int, m: int) -> CatalogEntry:
    for entry in catalog(kind):
        if entry.accuracy == AccuracyPair(n, m):
            return entry
    raise UnsupportedParameterRange(f"no catalog row ({n},{m}) for kind {RatioKind.parse(kind).value}")


def catalog_json(indent: int | None = 2) -> str:
    rows = [e.to_dict() for kind in RatioKind for e in catalog(kind)]
    return json.dumps(rows, indent=indent)


def coefficients_from_accuracy(kind: RatioKind | str, nu: float, n: int, m: int) -> BoundCoefficients:
    """Solve for (alpha, beta, gamma) from n conditions at 0 and m at infinity.

    With z the small-x ladder (2nu, z2, z3) and w the large-x ladder
    (w0, w1, w2, ...), the conditions for B read alpha + beta = 2nu,
    gamma^2/(2 beta) = z2, -gamma^4/(8 beta^3) = z3, gamma = w0,
    alpha = w1, beta^2/(2 gamma) = w2.
    """
    kind = RatioKind.parse(kind)
    if n + m != 3 or n < 0 or m < 0:
        raise UnsupportedParameterRange("coefficients_from_accuracy needs n + m = 3")
    entry = lookup(kind, n, m)
    if not entry.in_range(nu):
        raise UnsupportedParameterRange(f"nu={nu} outside the range of row {entry.label}")
    if n > zero_terms_available(kind, nu):
        raise UnsupportedParameterRange(f"the small-x expansion has fewer than {n} terms at nu={nu}")
    z = expansion_at_zero(kind, nu, n) if n else []
    w = expansion_at_infinity(kind, nu)
    if n == 3:
        z1, z2, z3 = z
        if z3 == 0:
            raise NoSolution("third small-x coefficient vanishes")
        beta = -z2 * z2 / (2 * z3)
        gamma2 = 2 * beta * z2
        alpha = z1 - beta
    elif n == 2:
        gamma2 = w[0] ** 2
        if z[1] == 0:
            raise NoSolution("second small-x coefficient vanishes")
        beta = gamma2 / (2 * z[1])
        alpha = z[0] - beta
    elif n == 1:
        gamma2 = w[0] ** 2
        alpha = w[1]
        beta = z[0] - alpha
    else:
        gamma2 = w[0] ** 2
        alpha = w[1]
        beta2 = 2 * w[0] * w[2]
        if beta2 < 0:
            raise NoSolution(f"beta^2 = {beta2} < 0")
        beta = math.sqrt(beta2)
    if gamma2 < 0 or beta < 0:
        raise NoSolution(f"conditions give beta={beta}, gamma^2={gamma2}")
    return BoundCoefficients(alpha, beta, math.sqrt(gamma2))


def one_three_bounds(nu: float) -> tuple[BoundCoefficients, BoundCoefficients]:
    """The (1,3)-type pair nu + sqrt(nu^2 + x(x -/+ 1)), divided by x.

    The lower bound has accuracy (1,3) for the first kind, the upper one
    for the second kind; both bound both ratios.
    """
    nu = float(nu)
    if not math.isfinite(nu):
        raise NonFiniteInput(f"nu must be finite, got {nu!r}")
    if nu < 0.5:
        raise UnsupportedParameterRange(f"(1,3) bounds need nu >= 1/2, got {nu}")
    return BoundCoefficients(nu, nu, 1.0, -1.0), BoundCoefficients(nu, nu, 1.0, 1.0)


ONE_THREE_LABEL = {Side.Lower: "(1,3)L", Side.Upper: "(1,3)U"}


def crossover_points(kind: RatioKind | str, side: Side | str, nu: float) -> dict[str, float]:
    """Closed-form switch points between envelope candidates.

    ``catalog`` is where the pure-table envelope switches rows, ``one_three``
    where the (1,3) bound overtakes the (2,1) row (0 when it wins everywhere).
    Only sides that have a switch report a key.
    """
    kind, side = RatioKind.parse(kind), Side.parse(side)
    out: dict[str, float] = {}
    if kind is RatioKind.FirstKind and side is Side.Lower:
        out["catalog"] = math.sqrt(3 * (nu + 0.5) * (nu + 5 / 6))
        out["one_three"] = 4 * (1 + nu) / 3
    elif kind is RatioKind.FirstKind:
        out["catalog"] = math.sqrt(3 * (nu + 1) * (nu + 2))
    elif side is Side.Upper:
        out["catalog"] = math.sqrt(3 * (nu - 0.5) * (nu - 5 / 6)) if nu > 5 / 6 else 0.0
        # equating the two bounds gives 3x^2 = 4(nu-1)x
        out["one_three"] = max(0.0, 4 * (nu - 1) / 3)
    else:
        out["catalog"] = math.sqrt(3 * (nu - 1) * (nu - 2))
    return out


def _envelope_range_check(kind: RatioKind, side: Side, nu: float) -> None:
    need = {
        (RatioKind.FirstKind, Side.Lower): 0.5,
        (RatioKind.FirstKind, Side.Upper): 0.0,
        (RatioKind.SecondKind, Side.Upper): 0.5,
        (RatioKind.SecondKind, Side.Lower): 2.0,
    }[(kind, side)]
    if nu < need:
        raise UnsupportedParameterRange(
            f"sharpest {side.value} envelope for {kind.value} needs nu >= {need:g}, got {nu}"
        )


def sharpest_envelope(
    kind: RatioKind | str,
    side: Side | str,
    nu: float,
    x: float,
    *,
    include_one_three: bool = False,
) -> tuple[BoundCoefficients, str]:
    """Pick the sharpest bound of the requested side at this x.

    The choice follows the closed-form crossovers; at an exact crossover the
    row with the larger n wins. ``include_one_three`` brings in the (1,3)
    bound on the two sides where it competes (first-kind lower and
    second-kind upper); elsewhere it has no effect.
    """
    kind, side = RatioKind.parse(kind), Side.parse(side)
    nu, x = float(nu), float(x)
    if not (math.isfinite(nu) and math.isfinite(x)):
        raise NonFiniteInput("nu and x must be finite")
    if x <= 0:
        raise UnsupportedParameterRange(f"x must be positive, got {x}")
    _envelope_range_check(kind, side, nu)
    cross = crossover_points(kind, side, nu)
    competes = (kind is RatioKind.FirstKind) == (side is Side.Lower)
    if include_one_three and competes:
        lower, upper = one_three_bounds(nu)
        if x > cross["one_three"]:
            return (lower if side is Side.Lower else upper), ONE_THREE_LABEL[side]
        entry = lookup(kind, 2, 1)
        return entry.coeffs_of_nu(nu), entry.label
    if kind is RatioKind.FirstKind:
        low_x, high_x = ((2, 1), (0, 3)) if side is Side.Lower else ((3, 0), (1, 2))
    else:
        low_x, high_x = ((2, 1), (0, 3)) if side is Side.Upper else ((3, 0), (1, 2))
    pick = low_x if x <= cross["catalog"] else high_x
    entry = lookup(kind, *pick)
    return entry.coeffs_of_nu(nu, allow_endpoint=True), entry.label


__all__ = [
    "AccuracyPair",
    "BoundCoefficients",
    "CatalogEntry",
    "Side",
    "bound_derivative",
    "catalog",
    "catalog_json",
    "coefficients_from_accuracy",
    "crossover_points",
    "eval_bound",
    "eval_bound_mp",
    "lookup",
    "one_three_bounds",
    "sharpest_envelope",
]
