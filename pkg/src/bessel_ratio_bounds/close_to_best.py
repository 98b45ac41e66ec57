"""One-parameter families of bounds that sweep between the best bound at 0 and at infinity.

Each family is indexed by lambda. At one end of ``lambda_domain`` the
family reproduces the table row that is best near x = 0, at the other end
the row that is best as x -> infinity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bound_catalog import BoundCoefficients, Side
from .errors import NegativeRadicand, NonFiniteInput, UnsupportedParameterRange
from .ratio_engine import RatioKind


class SharpEnd(enum.Enum):
    AtZero = "0"
    AtInfinity = "inf"

    @classmethod
    def parse(cls, value: "SharpEnd | str") -> "SharpEnd":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text in ("0", "zero", "atzero"):
            return cls.AtZero
        if text in ("inf", "infinity", "atinfinity", "oo"):
            return cls.AtInfinity
        raise UnsupportedParameterRange(f"unknown sharp end {value!r}; use 0 or inf")


@dataclass(frozen=True)
class FamilySpec:
    kind: RatioKind
    side: Side
    sharp_end: SharpEnd
    lambda_domain: tuple[float, float]
    name: str

    def __post_init__(self) -> None:
        infinity_sharp = (self.kind is RatioKind.FirstKind) == (self.side is Side.Lower)
        expected = SharpEnd.AtInfinity if infinity_sharp else SharpEnd.AtZero
        if self.sharp_end is not expected:
            raise UnsupportedParameterRange(
                f"{self.kind.value} {self.side.value} bounds are sharp at {expected.value}, not {self.sharp_end.value}"
            )

    def lambda_ladder(self, points: int = 11) -> np.ndarray:
        lo, hi = self.lambda_domain
        return np.linspace(lo, hi, points)

    @property
    def endpoint_rows(self) -> dict[float, tuple[int, int]]:
        """Which table row each end of the lambda domain reproduces."""
        lo, hi = self.lambda_domain
        if self.sharp_end is SharpEnd.AtInfinity:
            return {lo: (0, 3), hi: (2, 1)}
        return {lo: (1, 2), hi: (3, 0)}


HORN = FamilySpec(RatioKind.FirstKind, Side.Lower, SharpEnd.AtInfinity, (0.0, 0.5), "horn")
BNK = FamilySpec(RatioKind.SecondKind, Side.Upper, SharpEnd.AtInfinity, (0.0, 0.5), "bnk")
IU = FamilySpec(RatioKind.FirstKind, Side.Upper, SharpEnd.AtZero, (0.5, 2.0), "iu")
BLK = FamilySpec(RatioKind.SecondKind, Side.Lower, SharpEnd.AtZero, (0.5, 2.0), "blk")
FAMILIES = (HORN, BNK, IU, BLK)


def family_for(kind: RatioKind | str, side: Side | str) -> FamilySpec:
    kind, side = RatioKind.parse(kind), Side.parse(side)
    for fam in FAMILIES:
        if fam.kind is kind and fam.side is side:
            return fam
    raise AssertionError("unreachable")  # every (kind, side) pair has a family


def family_by_sharp_end(kind: RatioKind | str, sharp_end: SharpEnd | str) -> FamilySpec:
    kind, sharp_end = RatioKind.parse(kind), SharpEnd.parse(sharp_end)
    for fam in FAMILIES:
        if fam.kind is kind and fam.sharp_end is sharp_end:
            return fam
    raise AssertionError("unreachable")


def _root_term(nu: float, lam: float) -> float:
    r = (nu - (lam - 0.5)) * (nu + (lam - 0.5))
    if r < 0:
        raise NegativeRadicand(f"nu^2 - (lambda - 1/2)^2 < 0 at nu={nu}, lambda={lam}")
    return math.sqrt(r)


def beta_i(nu: float, lam: float) -> float:
    """sqrt(2 lambda) + sqrt(nu^2 - (lambda - 1/2)^2)."""
    return math.sqrt(2 * lam) + _root_term(nu, lam)


def beta_k(nu: float, lam: float) -> float:
    """-sqrt(2 lambda) + sqrt(nu^2 - (lambda - 1/2)^2), signed."""
    return -math.sqrt(2 * lam) + _root_term(nu, lam)


def c_i(nu: float, lam: float) -> float:
    den = nu - lam + 2 * math.sqrt(2 * lam) - 1
    if den <= 0:
        raise UnsupportedParameterRange(f"c^(I) denominator {den} <= 0 at nu={nu}, lambda={lam}")
    return (nu + lam) / den


def c_k(nu: float, lam: float) -> float:
    # (nu - lambda) + (sqrt(2 lambda) - 1)^2 keeps both terms visibly non-negative
    den = (nu - lam) + (math.sqrt(2 * lam) - 1) ** 2
    if den <= 0:
        if nu == lam == 0.5:
            return 1.0  # limit along lambda = 1/2, where the family equals the (1,2) row
        raise UnsupportedParameterRange(f"c^(K) denominator {den} <= 0 at nu={nu}, lambda={lam}")
    return (nu - lam) / den


def _check_domain(spec: FamilySpec, nu: float, lam: float, extended: bool) -> None:
    if not (math.isfinite(nu) and math.isfinite(lam)):
        raise NonFiniteInput("nu and lambda must be finite")
    lo, hi = spec.lambda_domain
    if spec.sharp_end is SharpEnd.AtInfinity and extended:
        if lam < 0:
            raise UnsupportedParameterRange(f"lambda must be >= 0, got {lam}")
        if nu < abs(lam - 0.5):
            raise NegativeRadicand(f"extended family needs nu >= |lambda - 1/2|, got nu={nu}, lambda={lam}")
        return
    if not lo <= lam <= hi:
        raise UnsupportedParameterRange(f"lambda={lam} outside [{lo:g}, {hi:g}] for family {spec.name}")
    if spec.sharp_end is SharpEnd.AtInfinity:
        if nu < 0.5 - lam:
            raise UnsupportedParameterRange(f"family {spec.name} needs nu >= 1/2 - lambda, got nu={nu}")
    elif spec.kind is RatioKind.FirstKind:
        if nu < 0:
            raise UnsupportedParameterRange(f"family {spec.name} needs nu >= 0, got nu={nu}")
    elif nu < lam:
        raise UnsupportedParameterRange(f"family {spec.name} needs nu >= lambda, got nu={nu}")


def close_to_best_coeffs(spec: FamilySpec, nu: float, lam: float, *, extended: bool = False) -> BoundCoefficients:
    """Coefficients of the family member with parameter lambda.

    ``extended`` admits any lambda >= 0 with nu >= |lambda - 1/2| for the two
    infinity-sharp families; those members are valid but never sharper
    than the lambda = 1/2 member.
    """
    nu, lam = float(nu), float(lam)
    _check_domain(spec, nu, lam, extended)
    if spec.kind is RatioKind.FirstKind and spec.sharp_end is SharpEnd.AtInfinity:
        return BoundCoefficients(nu - 0.5 - lam, beta_i(nu, lam), 1.0)
    if spec.sharp_end is SharpEnd.AtInfinity:
        # only beta^2 enters the bound, so a negative beta^(K) is stored by magnitude
        return BoundCoefficients(nu + 0.5 + lam, abs(beta_k(nu, lam)), 1.0)
    if spec.kind is RatioKind.FirstKind:
        return BoundCoefficients(nu - lam, nu + lam, math.sqrt(c_i(nu, lam)))
    return BoundCoefficients(nu + lam, nu - lam, math.sqrt(c_k(nu, lam)))


@dataclass(frozen=True)
class Quadratic:
    """c0 + c1 s + c2 s^2 with helpers for real roots."""

    c0: float
    c1: float
    c2: float

    def ascending(self) -> tuple[float, float, float]:
        return (self.c0, self.c1, self.c2)

    def descending(self) -> tuple[float, float, float]:
        return (self.c2, self.c1, self.c0)

    def __call__(self, s):
        return self.c0 + s * (self.c1 + s * self.c2)

    @property
    def degree(self) -> int:
        if self.c2 != 0:
            return 2
        return 1 if self.c1 != 0 else 0

    @property
    def discriminant(self) -> float:
        return self.c1 * self.c1 - 4 * self.c0 * self.c2

    def real_roots(self, *, tie_tol: float = 1e-12) -> tuple[float, ...]:
        """Real roots in increasing order; a near-zero discriminant gives a double root."""
        if self.degree == 0:
            return ()
        if self.degree == 1:
            return (-self.c0 / self.c1,)
        disc = self.discriminant
        scale = max(self.c1 * self.c1, abs(4 * self.c0 * self.c2))
        if disc < 0:
            if disc >= -tie_tol * scale:
                disc = 0.0
            else:
                return ()
        root = math.sqrt(disc)
        # cancellation-free pair
        q = -0.5 * (self.c1 + math.copysign(root, self.c1)) if self.c1 != 0 else -0.5 * root
        if q == 0:
            return (0.0, 0.0)
        r1, r2 = q / self.c2, self.c0 / q
        return tuple(sorted((r1, r2)))

    def as_numpy(self) -> np.polynomial.Polynomial:
        return np.polynomial.Polynomial(self.ascending())


def q_polynomial(alpha: float, beta: float, nu: float) -> Quadratic:
    """Q(s) = -beta^2 + (2 nu alpha - alpha^2 - beta^2) s + (1 - 2 alpha + 2 nu) s^2, with s = sqrt(beta^2 + x^2)."""
    return Quadratic(-beta * beta, 2 * nu * alpha - alpha * alpha - beta * beta, 1 - 2 * alpha + 2 * nu)


def r_polynomial(c: float, nu: float, lam: float) -> Quadratic:
    """R(s) = (c - 1) s^2 + [c(nu - lambda + 1) - nu - lambda] s + c(nu + lambda), with s = sqrt((nu+lambda)^2 + c x^2)."""
    return Quadratic(c * (nu + lam), c * (nu - lam + 1) - nu - lam, c - 1)


__all__ = [
    "BLK",
    "BNK",
    "FAMILIES",
    "FamilySpec",
    "HORN",
    "IU",
    "Quadratic",
    "SharpEnd",
    "beta_i",
    "beta_k",
    "c_i",
    "c_k",
    "close_to_best_coeffs",
    "family_by_sharp_end",
    "family_for",
    "q_polynomial",
    "r_polynomial",
]
