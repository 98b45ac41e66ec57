"""Helpers shared by the module tests and the acceptance suite."""

from __future__ import annotations

import math

from bessel_ratio_bounds.bound_catalog import CatalogEntry
from bessel_ratio_bounds.close_to_best import BLK, FamilySpec, SharpEnd
from bessel_ratio_bounds.ratio_engine import RatioKind

# rows valid for every real order are exercised from here upward
REAL_LINE_START = -50.0
OPEN_OFFSET = 0.01


def six_orders(entry: CatalogEntry) -> list[float]:
    """Six distinct in-range orders: the range start, a step above it, then fixed interior values."""
    start = REAL_LINE_START if math.isinf(entry.nu_min) else entry.nu_min
    if entry.nu_min_open:
        start += OPEN_OFFSET
    picks: list[float] = []
    for nu in (start, start + 0.25, 1.0, 2.5, 10.0, 50.0, 5.0, 20.0):
        if entry.in_range(nu) and nu not in picks:
            picks.append(nu)
        if len(picks) == 6:
            break
    return sorted(picks)


def family_orders(spec: FamilySpec) -> list[float]:
    """The domain minimum, then 1, 2, 5, 20."""
    if spec.sharp_end is SharpEnd.AtInfinity:
        low = 0.5
    elif spec.kind is RatioKind.FirstKind:
        low = 0.0
    else:
        low = BLK.lambda_domain[0]
    return [low, 1.0, 2.0, 5.0, 20.0]


def coeffs_close(a, b, rel: float) -> bool:
    for u, v in zip(a.as_tuple(), b.as_tuple()):
        if u == v:
            continue
        if abs(u - v) > rel * max(abs(u), abs(v)):
            return False
    return True
