"""Command-line interface: ``fracbessel <subcommand> [options]``.

Subcommands: ``eval``, ``asym-check``, ``oracle-check``, ``fit``, ``synth``
and ``profile``. Exit status is 0 on success, 2 on usage errors and 1 on
any other failure, with a one-line message on stderr.
"""

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .cornea import CornealParams, height_profile
from .fitting import DEFAULT_BOUNDS, fit_grid, synthesize_grid
from .io import (
    atomic_write_text,
    fmt,
    format_report,
    grid_csv_text,
    read_surface_csv,
    table_csv_text,
)
from .specfun import DEFAULT_REL_TOL, i0_alpha, i0_alpha_asym
from .volterra import oracle_report


def _alpha(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return value


def _positive(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0.0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _nonnegative(text):
    value = float(text)
    if not (math.isfinite(value) and value >= 0.0):
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text}")
    return value


def _rel_tol(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"rel-tol must lie in (0, 1), got {text}")
    return value


def _count(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {text}")
        return value

    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracbessel",
        description="Modified fractional Bessel function I0^alpha and the corneal height model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=_count(1), default=1, help="worker threads for oracle-check")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("eval", help="evaluate I0^alpha(x) by its series")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--x", type=_nonnegative, required=True)
    p.add_argument("--rel-tol", type=_rel_tol, default=DEFAULT_REL_TOL)

    p = sub.add_parser("asym-check", help="ratio of the series to the large-x form")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--x", type=_positive, nargs="+", default=[5.0, 10.0, 20.0, 40.0])
    p.add_argument(
        "--form",
        choices=("published", "saddle"),
        default="published",
        help="prefactor exponent of the large-x form (default: published)",
    )
    p.add_argument("--rel-tol", type=_rel_tol, default=DEFAULT_REL_TOL)
    p.add_argument("--out", type=Path, help="also write the table as CSV")

    p = sub.add_parser("oracle-check", help="series vs Volterra solver convergence table")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--x-max", type=_positive, default=2.0)
    p.add_argument("--steps", type=_count(2), nargs="+", default=[256, 512, 1024, 2048, 4096])
    p.add_argument("--out", type=Path, help="also write the table as CSV")

    p = sub.add_parser("fit", help="fit (a, b, alpha) to a surface CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--init", type=float, nargs=3, metavar=("A", "B", "ALPHA"))
    p.add_argument(
        "--bounds",
        type=float,
        nargs=6,
        metavar=("A_LO", "A_HI", "B_LO", "B_HI", "ALPHA_LO", "ALPHA_HI"),
    )
    p.add_argument("--rim-radius", type=_positive, help="rim radius in mm (overrides the file)")
    p.add_argument("--center", type=float, nargs=2, metavar=("CX", "CY"), help="center in mm")
    p.add_argument(
        "--orient",
        action="store_true",
        help="shift heights to a zero outer ring and flip so the apex is up",
    )
    p.add_argument("--residuals", type=Path, help="residual map CSV (default: INPUT.residuals.csv)")
    p.add_argument("--report", type=Path, help="also write the report JSON here")

    p = sub.add_parser("synth", help="write a synthetic model surface as grid CSV")
    p.add_argument("--a", type=_positive, required=True)
    p.add_argument("--b", type=_positive, required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--nx", type=_count(2), default=123)
    p.add_argument("--ny", type=_count(2), default=123)
    p.add_argument("--rim-radius", type=_positive, default=6.0, help="mm (default: 6)")
    p.add_argument("--noise", type=_nonnegative, default=0.0, help="Gaussian sigma in mm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("profile", help="export the radial height profile as CSV")
    p.add_argument("--a", type=_positive, required=True)
    p.add_argument("--b", type=_positive, required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--n-points", type=_count(2), default=101)
    p.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    return parser


def _emit_table(header, rows, out):
    width = 20
    print("".join(h.ljust(width) for h in header).rstrip())
    for row in rows:
        print("".join(("-" if v is None else fmt(v)).ljust(width) for v in row).rstrip())
    if out is not None:
        atomic_write_text(out, table_csv_text(header, rows))


def cmd_eval(args):
    res = i0_alpha(args.alpha, args.x, args.rel_tol)
    print(f"value {fmt(res.value)}")
    print(f"terms_used {res.terms_used}")
    print(f"last_term {fmt(res.last_term_magnitude)}")
    print(f"tail_bound {fmt(res.tail_bound)}")


def cmd_asym_check(args):
    rows = []
    prev = None
    for x in sorted(args.x):
        series = i0_alpha(args.alpha, x, args.rel_tol).value
        asym = i0_alpha_asym(args.alpha, x, args.form)
        ratio = series / asym
        change = None if prev is None else ratio / prev - 1.0
        rows.append((x, series, asym, ratio, change))
        prev = ratio
    _emit_table(("x", "series", "asymptotic", "ratio", "rel_change"), rows, args.out)


def cmd_oracle_check(args):
    if args.alpha == 0.0:
        raise ValueError("oracle-check needs alpha > 0 (the integral form has no alpha = 0 kernel)")
    if args.alpha == 1.0:
        print("note: alpha = 1 uses the regular kernel; the solver reduces to the trapezoidal rule")
    rows = oracle_report(args.alpha, args.x_max, args.steps, workers=args.threads)
    _emit_table(
        ("steps", "h", "max_abs_diff", "max_rel_diff", "order"),
        [(r.steps, r.step, r.max_abs_diff, r.max_rel_diff, r.order) for r in rows],
        args.out,
    )


def cmd_fit(args):
    grid = read_surface_csv(args.input, center=args.center, rim_radius=args.rim_radius)
    bounds = DEFAULT_BOUNDS
    if args.bounds is not None:
        bounds = tuple(zip(args.bounds[::2], args.bounds[1::2]))
    report = fit_grid(grid, orient=args.orient, init=args.init, bounds=bounds)
    text = format_report(report)
    residuals = args.residuals or args.input.with_name(args.input.stem + ".residuals.csv")
    atomic_write_text(
        residuals,
        grid_csv_text(report.residual_grid, grid.x_coords, grid.y_coords, grid.center, grid.rim_radius),
    )
    if args.report is not None:
        atomic_write_text(args.report, text + "\n")
    print(text)


def cmd_synth(args):
    params = CornealParams(args.a, args.b, args.alpha, args.rim_radius)
    grid = synthesize_grid(params, args.nx, args.ny, noise_sigma=args.noise, seed=args.seed)
    atomic_write_text(
        args.out,
        grid_csv_text(grid.heights, grid.x_coords, grid.y_coords, grid.center, grid.rim_radius),
    )


def cmd_profile(args):
    profile = height_profile(CornealParams(args.a, args.b, args.alpha), args.n_points)
    text = table_csv_text(("r", "h"), profile)
    if args.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)


COMMANDS = {
    "eval": cmd_eval,
    "asym-check": cmd_asym_check,
    "oracle-check": cmd_oracle_check,
    "fit": cmd_fit,
    "synth": cmd_synth,
    "profile": cmd_profile,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ValueError, OverflowError, ArithmeticError, RuntimeError, OSError) as exc:
        message = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"fracbessel {args.command}: error: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
