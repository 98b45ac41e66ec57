"""Command-line front end: ``brb ratio``, ``brb bounds``, ``brb verify``, ``brb catalog``.

Exit codes: 0 success, 1 a verification failed, 2 bad parameters or usage,
3 a numerical procedure failed.

Examples::

    brb ratio --kind K --nu 0.5 --x 2
    brb bounds --kind I --nu 1 --row 2,1 --x-min 0.1 --x-max 10 --format csv
    brb bounds --kind K --nu 3 --best-at 1.0 --sharp-end 0
    brb verify --suite catalog --nu 0.5,1,3,10
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from typing import Callable, Iterable, Sequence

import click
import numpy as np

from . import __version__
from .best_bounds import (
    osculatory,
    solve_x_star_from_lambda,
    verify_global_tangent_bound,
)
from .bound_catalog import (
    BoundCoefficients,
    Side,
    catalog,
    catalog_json,
    coefficients_from_accuracy,
    eval_bound,
    lookup,
    one_three_bounds,
    sharpest_envelope,
)
from .close_to_best import FAMILIES, SharpEnd, close_to_best_coeffs, family_by_sharp_end
from .errors import BesselRatioError, NumericError, ParameterError
from .ratio_engine import RatioKind, eval_ratio
from .verification import GridSpec, estimate_accuracy, monotone_ladder, signed_margin, verify_inequality

EXIT_OK, EXIT_VERIFY, EXIT_PARAM, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(value, digits: int) -> str:
    if isinstance(value, str):
        return value
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.{digits}g}"


def _emit(columns: Sequence[str], rows: Iterable[Sequence], fmt: str, header: dict | None = None) -> None:
    rows = list(rows)
    out = click.get_text_stream("stdout")
    if fmt == "json":
        payload = [dict(zip(columns, r)) for r in rows]
        doc = payload if header is None else {"solution": header, "rows": payload}
        out.write(json.dumps(doc, allow_nan=False, default=str) + "\n")
        return
    if fmt == "csv":
        buf = io.StringIO()
        if header:
            for k, v in header.items():
                buf.write(f"# {k}={_fmt(v, 17) if isinstance(v, float) else v}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(v, 17) for v in r])
        out.write(buf.getvalue())
        return
    if header:
        for k, v in header.items():
            out.write(f"# {k}: {_fmt(v, 6) if isinstance(v, float) else v}\n")
    cells = [list(columns)] + [[_fmt(v, 6) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(columns))]
    for c in cells:
        out.write("  ".join(s.rjust(w) for s, w in zip(c, widths)) + "\n")


def _run(action: Callable[[], int]) -> None:
    try:
        code = action()
    except ParameterError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARAM)
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    sys.exit(code)


def _x_values(xs: tuple[float, ...], x_min: float | None, x_max: float | None, ppd: int) -> list[float]:
    if xs:
        return [float(v) for v in xs]
    grid = GridSpec(x_min if x_min is not None else 1e-3, x_max if x_max is not None else 1e3, ppd)
    return [float(v) for v in grid.points()]


def _parse_row(text: str) -> tuple[int, int]:
    try:
        n, m = (int(p) for p in text.split(","))
    except ValueError:
        raise click.BadParameter("expected n,m such as 2,1", param_hint="--row") from None
    return n, m


def _parse_nu_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated numbers", param_hint="--nu") from None


kind_option = click.option("--kind", type=click.Choice(["I", "K"], case_sensitive=False), required=True)
format_option = click.option(
    "--format", "fmt", type=click.Choice(["table", "csv", "json"], case_sensitive=False), default="table"
)


def _grid_options(f):
    f = click.option("--points-per-decade", type=int, default=60, show_default=True)(f)
    f = click.option("--x-max", type=float, default=None)(f)
    f = click.option("--x-min", type=float, default=None)(f)
    f = click.option("--x", "xs", type=float, multiple=True, help="Evaluation point (repeatable).")(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="brb")
def main() -> None:
    """Evaluate, bound and verify ratios of modified Bessel functions."""


@main.command()
@kind_option
@click.option("--nu", type=float, required=True)
@_grid_options
@format_option
def ratio(kind: str, nu: float, xs, x_min, x_max, points_per_decade: int, fmt: str) -> None:
    """Print the ratio, phi' and the error estimate at each x."""

    def action() -> int:
        rows = []
        for x in _x_values(xs, x_min, x_max, points_per_decade):
            rv = eval_ratio(kind, nu, x)
            rows.append((x, rv.value, rv.phi_prime, rv.est_rel_error))
        _emit(("x", "ratio", "phi_prime", "est_rel_error"), rows, fmt.lower())
        return EXIT_OK

    _run(action)


def _bound_rows(kind: RatioKind, nu: float, xs: list[float], pick: Callable[[float], tuple[BoundCoefficients, str]], side: Side):
    rows = []
    for x in xs:
        coeffs, label = pick(x)
        value = eval_ratio(kind, nu, x).value
        b = eval_bound(coeffs, x)
        rows.append((x, value, b, signed_margin(side, b, value), label))
    return rows


@main.command()
@kind_option
@click.option("--nu", type=float, required=True)
@_grid_options
@click.option("--row", "row", type=str, default=None, help="Catalog row as n,m.")
@click.option("--envelope", type=click.Choice(["lower", "upper"]), default=None)
@click.option("--with-one-three", is_flag=True, help="Let the (1,3) bounds enter the envelope.")
@click.option("--lambda", "lam", type=float, default=None, help="Close-to-best family parameter.")
@click.option("--best-at", type=float, default=None, help="Tangency point x* of the best bound.")
@click.option("--sharp-end", type=click.Choice(["0", "inf"]), default="inf", show_default=True)
@format_option
def bounds(kind, nu, xs, x_min, x_max, points_per_decade, row, envelope, with_one_three, lam, best_at, sharp_end, fmt):
    """Compare a bound with the ratio: one catalog row, an envelope, a family member or a best bound.

    Without a selection every catalog row valid at nu is printed.
    """
    chosen = [opt for opt in (row, envelope, lam, best_at) if opt is not None]
    if len(chosen) > 1:
        raise click.UsageError("choose at most one of --row, --envelope, --lambda, --best-at")
    k = RatioKind.parse(kind)
    fmt = fmt.lower()

    def action() -> int:
        x_list = _x_values(xs, x_min, x_max, points_per_decade)
        columns = ("x", "ratio", "bound", "margin", "label")
        if row is not None:
            entry = lookup(k, *_parse_row(row))
            coeffs = entry.coeffs_of_nu(nu)
            _emit(columns, _bound_rows(k, nu, x_list, lambda x: (coeffs, entry.label), entry.side), fmt)
        elif envelope is not None:
            side = Side.parse(envelope)
            pick = lambda x: sharpest_envelope(k, side, nu, x, include_one_three=with_one_three)  # noqa: E731
            _emit(columns, _bound_rows(k, nu, x_list, pick, side), fmt)
        elif lam is not None:
            fam = family_by_sharp_end(k, sharp_end)
            coeffs = close_to_best_coeffs(fam, nu, lam)
            label = f"{fam.name}(lambda={lam:g})"
            _emit(columns, _bound_rows(k, nu, x_list, lambda x: (coeffs, label), fam.side), fmt)
        elif best_at is not None:
            sol = osculatory(k, sharp_end, nu, best_at)
            if not sol.valid:
                click.echo(
                    f"warning: lambda={sol.lambda_equiv:.6g} lies outside the window where the curve is "
                    "guaranteed to be a global bound",
                    err=True,
                )
            label = f"best(x*={best_at:g})"
            rows = _bound_rows(k, nu, x_list, lambda x: (sol.coeffs, label), sol.side)
            _emit(columns, rows, fmt, header=sol.to_dict())
        else:
            rows = []
            for entry in catalog(k):
                if entry.in_range(nu):
                    c = entry.coeffs_of_nu(nu)
                    rows.extend(_bound_rows(k, nu, x_list, lambda x, c=c, e=entry: (c, e.label), entry.side))
            _emit(columns, rows, fmt)
        return EXIT_OK

    _run(action)


@main.command("catalog")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
def catalog_cmd(fmt: str) -> None:
    """Export both bound tables."""
    if fmt == "json":
        click.echo(catalog_json())
        return
    rows = json.loads(catalog_json())
    cols = ("kind", "n", "m", "side", "alpha_expr", "beta_expr", "gamma_expr", "nu_min", "nu_min_open")
    _emit(cols, [tuple("-inf" if r[c] is None else r[c] for c in cols) for r in rows], "table")


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _claim(name: str, params: dict, holds: bool, detail: dict | None = None, skipped: str | None = None) -> dict:
    out = {"claim": name, "params": params, "holds": holds}
    if skipped:
        out["skipped"] = skipped
    if detail:
        out.update(detail)
    return out


def _suite_catalog(nus: list[float], rng: np.random.Generator) -> list[dict]:
    claims = []
    for kind in RatioKind:
        for entry in catalog(kind):
            for nu in nus:
                params = {"row": entry.label, "side": entry.side.value, "nu": nu}
                if not entry.in_range(nu):
                    claims.append(_claim("catalog_inequality", params, True, skipped="nu outside the row's range"))
                    continue
                coeffs = entry.coeffs_of_nu(nu)
                rep = verify_inequality(kind, entry.side, coeffs, nu)
                detail = {"report": rep.to_dict()}
                try:
                    acc = estimate_accuracy(kind, coeffs, nu)
                    detail["report"]["est_accuracy"] = {"n": acc.n, "m": acc.m}
                except BesselRatioError:
                    pass
                claims.append(_claim("catalog_inequality", params, rep.holds, detail))
            if entry.accuracy.n + entry.accuracy.m == 3:
                lo = max(entry.nu_min, 2.0 if kind is RatioKind.SecondKind else 0.5)
                sample = rng.uniform(lo + 0.01, lo + 20, size=20)
                worst = 0.0
                for nu in sample:
                    got = coefficients_from_accuracy(kind, nu, entry.accuracy.n, entry.accuracy.m)
                    ref = entry.coeffs_of_nu(nu)
                    for g, r in zip(got.as_tuple(), ref.as_tuple()):
                        worst = max(worst, abs(g - r) / max(abs(r), 1e-300) if r else abs(g))
                claims.append(
                    _claim("coefficients_from_accuracy", {"row": entry.label}, worst <= 1e-14, {"max_rel_diff": worst})
                )
    for nu in nus:
        if nu < 0.5:
            continue
        lower, upper = one_three_bounds(nu)
        for kind in RatioKind:
            for side, coeffs in ((Side.Lower, lower), (Side.Upper, upper)):
                rep = verify_inequality(kind, side, coeffs, nu)
                params = {"row": f"(1,3){side.value[0].upper()}", "kind": kind.value, "nu": nu}
                claims.append(_claim("one_three_inequality", params, rep.holds, {"report": rep.to_dict()}))
    return claims


def _suite_families(nus: list[float]) -> list[dict]:
    claims = []
    for fam in FAMILIES:
        for nu in nus:
            for lam in fam.lambda_ladder():
                params = {"family": fam.name, "nu": nu, "lambda": float(lam)}
                try:
                    coeffs = close_to_best_coeffs(fam, nu, float(lam))
                except ParameterError as exc:
                    claims.append(_claim("family_inequality", params, True, skipped=str(exc)))
                    continue
                rep = verify_inequality(fam.kind, fam.side, coeffs, nu)
                claims.append(_claim("family_inequality", params, rep.holds, {"report": rep.to_dict()}))
    return claims


def _best_ladder(kind: RatioKind, end: SharpEnd, nu: float) -> np.ndarray | None:
    fam = family_by_sharp_end(kind, end)
    lo, hi = fam.lambda_domain
    if kind is RatioKind.SecondKind and end is SharpEnd.AtInfinity:
        if nu <= 0.5:
            return None
        hi = min(0.5, nu - 0.5)
    if kind is RatioKind.FirstKind and end is SharpEnd.AtInfinity and nu < 0.5:
        return None
    if kind is RatioKind.SecondKind and end is SharpEnd.AtZero and nu < 2:
        return None
    return np.linspace(lo, hi, 13)[1:-1]


def _suite_best(nus: list[float]) -> list[dict]:
    claims = []
    directions = {
        (RatioKind.FirstKind, SharpEnd.AtInfinity): "increasing",
        (RatioKind.SecondKind, SharpEnd.AtInfinity): "decreasing",
        (RatioKind.FirstKind, SharpEnd.AtZero): "increasing",
        (RatioKind.SecondKind, SharpEnd.AtZero): "decreasing",
    }
    for (kind, end), direction in directions.items():
        for nu in nus:
            params = {"kind": kind.value, "sharp_end": end.value, "nu": nu}
            lams = _best_ladder(kind, end, nu)
            if lams is None:
                claims.append(_claim("best_bound_ladder", params, True, skipped="nu outside the guaranteed window"))
                continue
            sols = [solve_x_star_from_lambda(kind, end, nu, float(l)) for l in lams]
            xs = [s.x_star for s in sols]
            coef = [s.b_star if end is SharpEnd.AtInfinity else s.c_star for s in sols]
            x_ok = monotone_ladder(xs, "decreasing")
            c_ok = monotone_ladder(coef, direction)
            detail = {
                "lambda": [float(l) for l in lams],
                "x_star": xs,
                "coefficient": coef,
                "x_star_decreasing": x_ok,
                f"coefficient_{direction}": c_ok,
                "matched_roots": [s.matched_root for s in sols],
            }
            claims.append(_claim("best_bound_ladder", params, x_ok and c_ok, detail))
            for s in (sols[0], sols[len(sols) // 2], sols[-1]):
                rep = verify_global_tangent_bound(s)
                p = dict(params, lambda_equiv=s.lambda_equiv, x_star=s.x_star)
                ok = rep.holds and s.residuals_ok()
                claims.append(_claim("best_bound_tangent", p, ok, {"report": rep.to_dict()}))
    return claims


@main.command()
@click.option(
    "--suite", type=click.Choice(["catalog", "families", "best", "all"]), default="all", show_default=True
)
@click.option("--nu", "nu_text", type=str, default="0.5,1,3,10", show_default=True, help="Comma-separated orders.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
def verify(suite: str, nu_text: str, fmt: str) -> None:
    """Run the property suites and print one JSON report per claim.

    The random orders used by the catalog suite follow the BRB_SEED
    environment variable (default 0).
    """
    nus = _parse_nu_list(nu_text)
    seed = int(os.environ.get("BRB_SEED", "0"))

    def action() -> int:
        rng = np.random.default_rng(seed)
        claims: list[dict] = []
        if suite in ("catalog", "all"):
            claims += _suite_catalog(nus, rng)
        if suite in ("families", "all"):
            claims += _suite_families(nus)
        if suite in ("best", "all"):
            claims += _suite_best(nus)
        all_hold = all(c["holds"] for c in claims)
        doc = {"suite": suite, "nu": nus, "seed": seed, "holds": all_hold, "claims": claims}
        click.echo(json.dumps(doc, allow_nan=False, default=_json_default))
        return EXIT_OK if all_hold else EXIT_VERIFY

    _run(action)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


if __name__ == "__main__":  # pragma: no cover
    main()
