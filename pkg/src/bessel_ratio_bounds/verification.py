"""Grid checks of one-sided inequalities, accuracy-order estimation and ladders.

Every module's property tests go through :func:`verify_inequality`, so the
slack policy lives in exactly one place: :func:`slack`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bound_catalog import AccuracyPair, BoundCoefficients, Side, eval_bound
from .errors import BesselRatioError, UnsupportedParameterRange
from .ratio_engine import (
    RatioKind,
    eval_ratio,
    expansion_at_infinity,
    expansion_at_zero,
    zero_terms_available,
)

COEFF_REL_TOL = 1e-10
CONTACT_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Log-uniform grid of x values, optionally augmented with extra points."""

    x_min: float = 1e-3
    x_max: float = 1e3
    points_per_decade: int = 60
    extra: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not (0 < self.x_min <= self.x_max) or not math.isfinite(self.x_max):
            raise UnsupportedParameterRange("grid needs 0 < x_min <= x_max < inf")
        if self.points_per_decade < 1:
            raise UnsupportedParameterRange("points_per_decade must be >= 1")

    def points(self) -> np.ndarray:
        decades = math.log10(self.x_max / self.x_min)
        count = max(1, int(round(decades * self.points_per_decade)) + 1)
        base = np.geomspace(self.x_min, self.x_max, count) if count > 1 else np.array([self.x_min])
        if self.extra:
            base = np.union1d(base, np.asarray(self.extra, dtype=float))
        return base

    def with_extra(self, more: Iterable[float]) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.points_per_decade, tuple(self.extra) + tuple(more))


STANDARD_GRID = GridSpec()


def slack(ratio: float, est_rel_error: float) -> float:
    """Allowed one-sided miss: 1e-11 max(1, ratio) + 10 est_rel_error |ratio|."""
    return 1e-11 * max(1.0, abs(ratio)) + 10.0 * est_rel_error * abs(ratio)


@dataclass(frozen=True)
class VerificationReport:
    holds: bool
    min_margin: float
    worst_x: float
    n_points: int
    violations: tuple[tuple[float, float], ...] = ()
    est_accuracy: AccuracyPair | None = None
    label: str = field(default="", compare=False)

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        """Associative, order-independent combination of two reports."""
        mine = (self.min_margin, self.worst_x)
        theirs = (other.min_margin, other.worst_x)
        if math.isnan(mine[0]):
            best = theirs
        elif math.isnan(theirs[0]):
            best = mine
        else:
            best = min(mine, theirs)
        acc = self.est_accuracy if self.est_accuracy == other.est_accuracy else None
        violations = tuple(sorted(set(self.violations) | set(other.violations), key=_violation_key))
        return VerificationReport(
            holds=self.holds and other.holds,
            min_margin=best[0],
            worst_x=best[1],
            n_points=self.n_points + other.n_points,
            violations=violations,
            est_accuracy=acc,
            label=self.label if self.label == other.label else "",
        )

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "min_margin": _json_float(self.min_margin),
            "worst_x": _json_float(self.worst_x),
            "n_points": self.n_points,
            "violations": [{"x": _json_float(x), "margin": _json_float(m)} for x, m in self.violations],
            "est_accuracy": None
            if self.est_accuracy is None
            else {"n": self.est_accuracy.n, "m": self.est_accuracy.m},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _violation_key(item: tuple[float, float]) -> tuple[float, float]:
    x, m = item
    return (x, -math.inf if math.isnan(m) else m)


def _json_float(v: float):
    if v is None or math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(f"{v:.17g}")


def signed_margin(side: Side, bound: float, ratio: float) -> float:
    """Positive when the inequality holds: bound - ratio for upper, ratio - bound for lower."""
    return bound - ratio if side is Side.Upper else ratio - bound


def merge_reports(reports: Sequence[VerificationReport]) -> VerificationReport:
    if not reports:
        raise ValueError("nothing to merge")
    out = reports[0]
    for rep in reports[1:]:
        out = out.merge(rep)
    return out


def verify_inequality(
    kind: RatioKind | str,
    side: Side | str,
    coeffs: BoundCoefficients,
    nu: float,
    grid: GridSpec = STANDARD_GRID,
    *,
    contact: float | None = None,
    contact_halfwidth: float | None = None,
    label: str = "",
) -> VerificationReport:
    """Check the one-sided inequality at every grid point.

    With ``contact`` set, points within ``contact_halfwidth`` of it only need
    |B - ratio| <= 1e-8 max(1, ratio); the reported minimum margin then
    refers to points outside that neighbourhood.
    """
    kind, side = RatioKind.parse(kind), Side.parse(side)
    xs = grid.points()
    violations: list[tuple[float, float]] = []
    min_margin, worst_x = math.inf, math.nan
    for x in xs:
        x = float(x)
        try:
            rv = eval_ratio(kind, nu, x)
            b = eval_bound(coeffs, x)
        except BesselRatioError:
            violations.append((x, math.nan))
            continue
        margin = signed_margin(side, b, rv.value)
        if contact is not None and abs(x - contact) <= contact_halfwidth:
            if abs(b - rv.value) > CONTACT_TOL * max(1.0, rv.value) and margin < 0:
                violations.append((x, margin))
            continue
        if margin < min_margin or (margin == min_margin and x < worst_x):
            min_margin, worst_x = margin, x
        if margin < -slack(rv.value, rv.est_rel_error):
            violations.append((x, margin))
    if math.isinf(min_margin):
        min_margin = math.nan
    return VerificationReport(
        holds=not violations,
        min_margin=min_margin,
        worst_x=worst_x,
        n_points=len(xs),
        violations=tuple(sorted(violations, key=_violation_key)),
        label=label,
    )


def sqrt_series(f: Sequence[float], n_terms: int) -> list[float]:
    """Power-series square root: g0 = sqrt(f0), g_k = (f_k - sum g_j g_{k-j}) / (2 g0)."""
    g0 = math.sqrt(f[0])
    if g0 == 0:
        raise ValueError("sqrt_series needs f0 > 0")
    g = [g0]
    for k in range(1, n_terms):
        fk = f[k] if k < len(f) else 0.0
        acc = sum(g[j] * g[k - j] for j in range(1, k))
        g.append((fk - acc) / (2 * g0))
    return g


def _close(a: float, b: float, scale: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    return abs(a - b) <= COEFF_REL_TOL * max(abs(a), abs(b)) or abs(a - b) <= 1e-14 * scale


def _bound_ladder_at_zero(c: BoundCoefficients) -> list[float]:
    """Coefficients of x^-1, x^0, x^1, x^2, x^3 in the small-x expansion of B."""
    a, b, g, d = c.as_tuple()
    if b == 0:
        if d == 0:
            return [a, g, 0.0, 0.0, 0.0]
        # sqrt(d x + ...) brings in x^(-1/2): nothing past the leading term matches
        return [a, math.nan, math.nan, math.nan, math.nan]
    s = sqrt_series([b * b, d, g * g], 5)
    return [a + s[0]] + s[1:]


def _bound_ladder_at_infinity(c: BoundCoefficients) -> list[float]:
    """Coefficients of x^0, x^-1, x^-2, x^-3 in the large-x expansion of B."""
    a, b, g, d = c.as_tuple()
    if g == 0:
        return [0.0, math.nan, math.nan, math.nan]
    h = sqrt_series([g * g, d, b * b], 4)
    return [h[0], a + h[1], h[2], h[3]]


def estimate_accuracy(kind: RatioKind | str, coeffs: BoundCoefficients, nu: float) -> AccuracyPair:
    """Count matched leading expansion terms of the bound at 0 and at infinity.

    The ratio's small-x ladder has only odd powers, so the even-power
    coefficients of B must vanish for a term to count. For the second kind
    with 0 < nu <= 1 the non-analytic x^(2nu-1) term caps n at 1.
    """
    kind = RatioKind.parse(kind)
    avail = zero_terms_available(kind, nu)
    if avail == 0:
        raise UnsupportedParameterRange(f"no small-x expansion for kind {kind.value} at nu={nu}")
    z = expansion_at_zero(kind, nu, avail)
    ratio_zero = [z[0], 0.0] + ([z[1]] if avail > 1 else []) + ([0.0, z[2]] if avail > 2 else [])
    bound_zero = _bound_ladder_at_zero(coeffs)
    scale = max(1.0, abs(nu))
    n = 0
    for t in range(avail):
        lo, hi = max(0, 2 * t - 1), 2 * t
        if all(_close(bound_zero[p], ratio_zero[p], scale) for p in range(lo, hi + 1)):
            n += 1
        else:
            break
    w = expansion_at_infinity(kind, nu)
    bound_inf = _bound_ladder_at_infinity(coeffs)
    m = 0
    for p in range(len(w)):
        if _close(bound_inf[p], w[p], scale * scale):
            m += 1
        else:
            break
    return AccuracyPair(n, m)


def monotone_ladder(values: Sequence[float], direction: str) -> bool:
    """Strict monotonicity with ties (within 1e-12 of the scale) counted as failures."""
    if len(values) < 3:
        raise ValueError("a ladder needs at least 3 values")
    vals = [float(v) for v in values]
    if any(not math.isfinite(v) for v in vals):
        return False
    tol = 1e-12 * max(abs(v) for v in vals)
    steps = np.diff(vals)
    if direction in ("increasing", "inc", "up"):
        return bool(np.all(steps > tol))
    if direction in ("decreasing", "dec", "down"):
        return bool(np.all(steps < -tol))
    raise ValueError(f"unknown direction {direction!r}")


__all__ = [
    "GridSpec",
    "STANDARD_GRID",
    "VerificationReport",
    "estimate_accuracy",
    "merge_reports",
    "monotone_ladder",
    "signed_margin",
    "slack",
    "sqrt_series",
    "verify_inequality",
]
