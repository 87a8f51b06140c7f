"""Command line front end.

Every subcommand builds a kernel, validates it, runs one computation, and
writes a CSV (to --out, or stdout).  Floats are printed with 17 significant
digits so runs can be compared byte for byte.

Exit codes: 0 success, 2 configuration error (unknown function, singular
kernel system, failed kernel validation, bad flags), 3 missing lattice data.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    FunctionProfile,
    MissingProfileEntry,
    build_bound_report,
    convergence_study,
    gbs_modulus_bound,
    mixed_modulus_estimate,
)
from .functions import UnknownFunction, fn_lookup
from .kernel1d import (
    CentralBSpline,
    CombinationKernel,
    SingularSystem,
    construct_combination_kernel,
)
from .kernel2d import (
    MomentTable,
    TensorKernel2D,
    UnsupportedKernel,
    absolute_moment,
    partition_of_unity_check,
    validate_kernel,
)
from .operators import (
    CatalogMissingDerivative,
    EvalGrid,
    LatticeField,
    MissingData,
    admissible_box,
    apply_gbs,
    apply_gw,
    apply_sw,
    read_lattice_csv,
    read_pgm,
)

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

VALIDATION_GRID = 32
VALIDATION_TOL = 1e-8


def _g(x) -> str:
    return format(float(x), ".17g")


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_box(text: str) -> tuple[float, float, float, float]:
    parts = _parse_floats(text)
    if len(parts) != 4:
        raise ValueError("box needs exactly four numbers: x0,y0,x1,y1")
    x0, y0, x1, y1 = parts
    if x0 >= x1 or y0 >= y1:
        raise ValueError("box must satisfy x0 < x1 and y0 < y1")
    return parts


def _build_kernel(args) -> TensorKernel2D:
    if args.kernel == "bspline":
        axis = CentralBSpline(args.r)
    else:
        shifts = _parse_floats(args.shifts)
        if len(shifts) != args.r:
            raise ValueError(
                f"combination kernel of order {args.r} needs {args.r} shifts, "
                f"got {len(shifts)}"
            )
        axis = construct_combination_kernel(args.r, shifts)
    kernel = TensorKernel2D(axis, axis)
    validate_kernel(kernel, grid_n=VALIDATION_GRID, tol=VALIDATION_TOL)
    return kernel


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def _load_field(args, kernel: TensorKernel2D) -> LatticeField:
    path = Path(args.input)
    if path.suffix.lower() == ".pgm":
        field = read_pgm(path)
    else:
        field = read_lattice_csv(path)
    if args.input_w is not None:
        field = dataclasses.replace(field, w=args.input_w)
    return field


def _cmd_reconstruct(args) -> int:
    kernel = _build_kernel(args)
    if (args.fn is None) == (args.input is None):
        raise ValueError("give exactly one of --fn or --input")
    if args.fn is not None:
        f = fn_lookup(args.fn)
        box = _parse_box(args.box) if args.box else f.default_box
        grid = EvalGrid.regular(box, args.grid_n, args.w)
        if args.op == "gw":
            approx = apply_gw(f, kernel, grid)
        elif args.op == "sw":
            approx = apply_sw(f, kernel, grid, args.quad_order)
        else:
            approx = apply_gbs(f, kernel, grid, args.quad_order)
        lines = ["x,y,approx,exact,abs_err"]
        for (x, y), a in zip(grid.points, approx):
            e = float(f(x, y))
            lines.append(f"{_g(x)},{_g(y)},{_g(a)},{_g(e)},{_g(abs(a - e))}")
        _emit(lines, args.out)
        return EXIT_OK
    field = _load_field(args, kernel)
    box = _parse_box(args.box) if args.box else admissible_box(field, kernel)
    grid = EvalGrid.regular(box, args.grid_n, field.w)
    if args.op == "gw":
        approx = apply_gw(field, kernel, grid)
    elif args.op == "sw":
        approx = apply_sw(field, kernel, grid, args.quad_order)
    else:
        raise ValueError("the boolean-sum operator needs --fn, not --input")
    lines = ["x,y,approx"]
    for (x, y), a in zip(grid.points, approx):
        lines.append(f"{_g(x)},{_g(y)},{_g(a)}")
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_moments(args) -> int:
    kernel = _build_kernel(args)
    table = MomentTable.compute(kernel, eta_max=args.eta_max, grid_n=args.grid_n)
    lines = ["p1,p2,algebraic_mean,spread,absolute_sup"]
    for p1, p2 in table.index_pairs():
        lines.append(
            f"{p1},{p2},{_g(table.algebraic_mean[(p1, p2)])},"
            f"{_g(table.algebraic_spread[(p1, p2)])},"
            f"{_g(table.absolute_sup[(p1, p2)])}"
        )
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    kernel = _build_kernel(args)
    f = fn_lookup(args.fn)
    box = _parse_box(args.box) if args.box else f.default_box
    profile = FunctionProfile.from_function(f, box)
    report = build_bound_report(kernel, args.w, profile, grid_n=args.grid_n)
    lines = ["name,value"]
    for name, value in report.constants.items():
        lines.append(f"{name},{_g(value)}")
    for name, value in report.inputs.items():
        lines.append(f"input_{name},{_g(value)}")
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_converge(args) -> int:
    kernel = _build_kernel(args)
    f = fn_lookup(args.fn)
    box = _parse_box(args.box) if args.box else f.default_box
    w_list = _parse_floats(args.w_list)
    table = convergence_study(
        f, kernel, args.op, w_list, box, args.grid_n, args.quad_order
    )
    lines = ["w,sup_error"]
    for w, e in table.rows:
        lines.append(f"{_g(w)},{_g(e)}")
    lines.append(f"slope,{_g(table.fitted_slope)}")
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_kernel_info(args) -> int:
    kernel = _build_kernel(args)
    table = MomentTable.compute(kernel, eta_max=kernel.moment_order, grid_n=args.grid_n)
    lines = ["name,value"]
    rows = [
        ("r", args.r),
        ("moment_order", kernel.moment_order),
        ("support_x_lo", kernel.support_x[0]),
        ("support_x_hi", kernel.support_x[1]),
        ("support_y_lo", kernel.support_y[0]),
        ("support_y_hi", kernel.support_y[1]),
        ("partition_deviation", partition_of_unity_check(kernel, args.grid_n)),
        ("abs_mass", absolute_moment(kernel, 0, 0, args.grid_n)),
        ("moment_constant", table.rth_moment_constant(kernel.moment_order)),
    ]
    if isinstance(kernel.kx, CombinationKernel):
        for i, (s, c) in enumerate(zip(kernel.kx.shifts, kernel.kx.coefficients)):
            rows.append((f"shift_{i}", s))
            rows.append((f"coeff_{i}", c))
    for name, value in rows:
        lines.append(f"{name},{_g(value)}")
    _emit(lines, args.out)
    return EXIT_OK


def _cmd_gbs(args) -> int:
    kernel = _build_kernel(args)
    f = fn_lookup(args.fn)
    box = _parse_box(args.box) if args.box else f.default_box
    grid = EvalGrid.regular(box, args.grid_n, args.w)
    delta = 1.0 / args.w
    omega = mixed_modulus_estimate(f, delta, delta, box)
    bound = gbs_modulus_bound(kernel, args.w, delta, delta, omega)
    approx = apply_gbs(f, kernel, grid, args.quad_order)
    lines = ["x,y,approx,exact,abs_err,modulus_bound"]
    for (x, y), a in zip(grid.points, approx):
        e = float(f(x, y))
        lines.append(
            f"{_g(x)},{_g(y)},{_g(a)},{_g(e)},{_g(abs(a - e))},{_g(bound)}"
        )
    _emit(lines, args.out)
    return EXIT_OK


def _add_kernel_options(sub) -> None:
    sub.add_argument(
        "--kernel",
        choices=["bspline", "combo"],
        default="combo",
        help="axis kernel: plain central B-spline or moment-cancelling combination",
    )
    sub.add_argument("--r", type=int, default=3, help="kernel order")
    sub.add_argument(
        "--shifts",
        default="2,3,4",
        help="comma-separated shifts for the combination kernel",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kanto",
        description="Lattice sampling series: reconstruction, moments, error bounds.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("reconstruct", help="evaluate an operator on a grid")
    _add_kernel_options(sub)
    sub.add_argument("--fn", help="catalog function name")
    sub.add_argument("--input", help="lattice CSV or PGM image file")
    sub.add_argument(
        "--input-w", type=float, default=None, help="override the input lattice rate"
    )
    sub.add_argument("--op", choices=["gw", "sw", "gbs"], default="gw")
    sub.add_argument("--w", type=float, default=10.0, help="lattice rate")
    sub.add_argument("--box", help="evaluation box x0,y0,x1,y1")
    sub.add_argument("--grid-n", type=int, default=20)
    sub.add_argument("--quad-order", type=int, default=5)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_reconstruct)

    sub = subs.add_parser("moments", help="tabulate kernel lattice moments")
    _add_kernel_options(sub)
    sub.add_argument("--eta-max", type=int, default=3)
    sub.add_argument("--grid-n", type=int, default=64)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_moments)

    sub = subs.add_parser("bounds", help="evaluate every error-bound constant")
    _add_kernel_options(sub)
    sub.add_argument("--fn", required=True, help="catalog function name")
    sub.add_argument("--w", type=float, default=10.0, help="lattice rate")
    sub.add_argument("--box", help="profile box x0,y0,x1,y1")
    sub.add_argument("--grid-n", type=int, default=64)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_bounds)

    sub = subs.add_parser("converge", help="sup-error table over increasing rates")
    _add_kernel_options(sub)
    sub.add_argument("--fn", required=True, help="catalog function name")
    sub.add_argument("--op", choices=["gw", "sw", "gbs"], default="gw")
    sub.add_argument("--w-list", default="5,10,20,40", help="comma-separated rates")
    sub.add_argument("--box", help="evaluation box x0,y0,x1,y1")
    sub.add_argument("--grid-n", type=int, default=20)
    sub.add_argument("--quad-order", type=int, default=5)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_converge)

    sub = subs.add_parser("kernel-info", help="kernel summary constants")
    _add_kernel_options(sub)
    sub.add_argument("--grid-n", type=int, default=64)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_kernel_info)

    sub = subs.add_parser(
        "gbs", help="boolean-sum reconstruction with its modulus bound"
    )
    _add_kernel_options(sub)
    sub.add_argument("--fn", required=True, help="catalog function name")
    sub.add_argument("--w", type=float, default=10.0, help="lattice rate")
    sub.add_argument("--box", help="evaluation box x0,y0,x1,y1")
    sub.add_argument("--grid-n", type=int, default=20)
    sub.add_argument("--quad-order", type=int, default=5)
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.set_defaults(handler=_cmd_gbs)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return args.handler(args)
    except MissingData as exc:
        print(f"error: missing lattice value at (k={exc.k}, j={exc.j})", file=sys.stderr)
        return EXIT_DATA
    except (
        UnknownFunction,
        SingularSystem,
        UnsupportedKernel,
        MissingProfileEntry,
        CatalogMissingDerivative,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> int:
    return main()
