"""Command-line driver: method cards, theta tables, bound curves, benchmarks, cost curves.

Every subcommand except ``build`` writes CSV with a header naming columns and
units.  Floats carry 17 significant digits; tolerances are printed as the
exact decimal value of the double.  Exit status is 0 on success, 2 on
invalid input and 3 on a numerical failure such as a singular shifted
system.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from decimal import Context, Decimal
from fractions import Fraction

import numpy as np

from . import __version__
from .action import PENTADIAGONAL, TRIDIAGONAL, cost_curve
from .bench import ORACLE_DIGITS, MatrixSpec, bench_action, bench_dense, default_h_grid
from .errors import bound_table
from .exceptions import NumericalError, ValidationError
from .methods import TEMPLATES, as_fraction, build_hybrid, build_plain, catalog, to_card, to_residual_form
from .series import parse_function

__all__ = ["main", "format_float", "exact_decimal", "parse_tol", "write_csv"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def format_float(x) -> str:
    return format(float(x), ".16e")


def exact_decimal(x) -> str:
    """Exact decimal expansion of a double, e.g. 2^-24 -> 5.9604644775390625e-8."""
    # Decimal(float) is exact; a double never needs more than 767 digits
    return format(Decimal(float(x)).normalize(Context(prec=800)), "e")


def parse_tol(text: str) -> float:
    """Accepts ``2^-24``, ``2**-24`` or any float literal."""
    t = text.strip().replace("**", "^")
    try:
        if "^" in t:
            base, exp = t.split("^", 1)
            value = float(base) ** float(exp)
        else:
            value = float(t)
    except ValueError:
        raise ValidationError(f"cannot parse tolerance {text!r}") from None
    if not value > 0:
        raise ValidationError(f"tolerance must be positive, got {text!r}")
    return value


def _split(text: str) -> list:
    return [s.strip() for s in text.split(",") if s.strip()]


def _fractions(text: str) -> list:
    try:
        return [as_fraction(Fraction(s)) for s in _split(text)]
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse rational list {text!r}") from None


def _floats(text: str) -> list:
    try:
        return [float(s) for s in _split(text)]
    except ValueError:
        raise ValidationError(f"cannot parse number list {text!r}") from None


def _free_weights(text: str) -> dict:
    """``9=-50000,10=1/3`` with 1-based indices into the shift list."""
    out = {}
    for item in _split(text):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"free weight {item!r} is not of the form i=value")
        try:
            i = int(key)
            out[i - 1] = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse free weight {item!r}") from None
        if i < 1:
            raise ValidationError("free weight indices start at 1")
    return out


def write_csv(header, rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _grid(args, lo_default, hi_default, n_default):
    if args.h_grid is not None:
        return _floats(args.h_grid)
    lo = lo_default if args.h_min is None else args.h_min
    hi = hi_default if args.h_max is None else args.h_max
    n = n_default if args.num is None else args.num
    if n < 0 or not (0 < lo <= hi):
        raise ValidationError("h range needs 0 < h-min <= h-max and num >= 0")
    return default_h_grid(n, lo, hi)


# --- subcommands -----------------------------------------------------------


def cmd_build(args, out):
    if args.catalog:
        if args.shifts or args.template:
            raise ValidationError("--catalog excludes --shifts and --template")
        method = catalog(args.catalog)
    else:
        if args.order is None:
            raise ValidationError("--order is required")
        try:
            function = parse_function(args.function)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        if bool(args.shifts) == bool(args.template):
            raise ValidationError("give exactly one of --shifts or --template")
        if args.template:
            template = TEMPLATES.get(args.template)
            if template is None:
                raise ValidationError(f"unknown template {args.template!r}; known: {', '.join(TEMPLATES)}")
            if args.alpha is None:
                raise ValidationError("--template needs --alpha")
            shifts = template.shifts(as_fraction(Fraction(args.alpha)))
        else:
            shifts = _fractions(args.shifts)
        if args.hybrid or args.free:
            free = _free_weights(args.free) if args.free else {}
            method = build_hybrid(shifts, free, function, args.order, args.name)
        else:
            method = build_plain(shifts, function, args.order, args.name)
    if args.residual:
        method = to_residual_form(method)
    out.write(to_card(method))


def cmd_theta(args, out):
    methods = _split(args.methods)
    tols = [parse_tol(t) for t in _split(args.tols)]
    table = bound_table(methods, tols, x_grid=[])
    rows = [(m, exact_decimal(tol), format_float(th), int(sat)) for m, tol, th, sat in table.thetas]
    write_csv(["method", "tol[abs]", "theta[norm]", "saturated[0/1]"], rows, out)


def cmd_bounds(args, out):
    methods = _split(args.methods)
    grid = _grid(args, 1e-2, 2.0, 60)
    table = bound_table(methods, [], x_grid=grid)
    rows = [(m, format_float(x), format_float(e)) for m, x, e in table.curves]
    write_csv(["method", "x[norm]", "epsilon[abs]"], rows, out)


def _bench_rows(records):
    return [
        (r.method, format_float(r.h_norm), format_float(r.error), format_float(r.serial_cost), format_float(r.parallel_cost))
        for r in records
    ]


def cmd_bench_dense(args, out):
    spec = MatrixSpec(args.matrix, args.dim, args.seed)
    records = bench_dense(spec, _split(args.methods), _grid(args, 1e-2, 4.0, 40), args.workers, args.digits)
    header = ["method", "h_norm[h*||A||_2]", "error[2-norm]", "serial_cost[products]", "parallel_cost[products]"]
    write_csv(header, _bench_rows(records), out)


def cmd_bench_action(args, out):
    spec = MatrixSpec(args.matrix, args.dim, args.seed)
    records = bench_action(spec, _split(args.methods), _grid(args, 1e-2, 4.0, 40), args.workers, args.digits)
    header = ["method", "h_norm[h*||A||_2]", "error[2-norm]", "serial_cost[matvecs]", "parallel_cost[matvecs]"]
    write_csv(header, _bench_rows(records), out)


def cmd_cost_curve(args, out):
    if args.num < 0 or args.norm_min < 0 or args.norm_min > args.norm_max:
        raise ValidationError("cost curve needs 0 <= norm-min <= norm-max and num >= 0")
    grid = list(np.linspace(args.norm_min, args.norm_max, args.num)) if args.num else []
    model = {"tridiagonal": TRIDIAGONAL, "pentadiagonal": PENTADIAGONAL}[args.model]
    rows = [
        (format_float(r.norm), format_float(r.taylor_cost), format_float(r.frac_serial_cost), format_float(r.frac_parallel_cost))
        for r in cost_curve(grid, parse_tol(args.tol), model)
    ]
    header = ["norm[||A||]", "taylor_cost[matvecs]", "frac_serial_cost[matvecs]", "frac_parallel_cost[matvecs]"]
    write_csv(header, rows, out)


# --- parser ----------------------------------------------------------------


def _add_grid(p, what):
    p.add_argument("--h-grid", help=f"comma-separated {what} values (overrides the range flags)")
    p.add_argument("--h-min", type=float, help=f"smallest {what}")
    p.add_argument("--h-max", type=float, help=f"largest {what}")
    p.add_argument("--num", type=int, help="number of log-spaced grid points")


def _add_bench(p, matrix, dim, methods):
    p.add_argument("--matrix", default=matrix, help="randn, cauchy or trid121")
    p.add_argument("--dim", type=int, default=dim)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default=methods, help="comma-separated method names")
    p.add_argument("--workers", type=int, default=1, help="grid points evaluated concurrently")
    p.add_argument("--digits", type=int, default=ORACLE_DIGITS, help="oracle precision in decimal digits")
    _add_grid(p, "h*||A||_2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parfrac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--out", help="write output to FILE instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="solve for the weights of a fraction method and print its card")
    p.add_argument("--function", default="exp", help="exp, phiN, log1m, cos or sin")
    p.add_argument("--shifts", help="comma-separated rationals, e.g. 1/2,1/3,0")
    p.add_argument("--template", help="shift pattern scaled by --alpha: " + ", ".join(TEMPLATES))
    p.add_argument("--alpha", help="template scale (rational)")
    p.add_argument("--order", type=int)
    p.add_argument("--hybrid", action="store_true", help="add a quadratic polynomial part")
    p.add_argument("--free", help="fixed weights for a hybrid method, i=value with 1-based i")
    p.add_argument("--catalog", help="print a published method instead (append ' for residual form)")
    p.add_argument("--residual", action="store_true", help="convert to residual form")
    p.add_argument("--name")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("theta", help="largest norm meeting each tolerance")
    p.add_argument("--methods", default="taylor5,taylor10,taylor15,R4,R5,R8,R10star,R10")
    p.add_argument("--tols", default="2^-24", help="comma-separated, e.g. 2^-24,2^-53")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("bounds", help="forward error bound curves")
    p.add_argument("--methods", default="R4,pade4,R8,taylor8")
    _add_grid(p, "x")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bench-dense", help="errors of exp(hA) or phi1(hA) against a high-precision oracle")
    _add_bench(p, "randn", 100, "R4,pade4,R8,taylor8")
    p.set_defaults(func=cmd_bench_dense)

    p = sub.add_parser("bench-action", help="errors of exp(hA) v for a tridiagonal A")
    _add_bench(p, "trid121", 1000, "R10,R10',T10")
    p.set_defaults(func=cmd_bench_action)

    p = sub.add_parser("cost-curve", help="matvec cost of Taylor and fraction selectors against ||A||")
    p.add_argument("--norm-min", type=float, default=0.01)
    p.add_argument("--norm-max", type=float, default=2.0)
    p.add_argument("--num", type=int, default=200, help="grid points, 0 for an empty table")
    p.add_argument("--tol", default="2^-24")
    p.add_argument("--model", choices=("tridiagonal", "pentadiagonal"), default="tridiagonal")
    p.set_defaults(func=cmd_cost_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except NumericalError as exc:
        print(f"parfrac: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # ValidationError and the ValueErrors raised while parsing input
        print(f"parfrac: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
