"""Error-bound evaluators, smoothness estimators, and convergence studies.

The bound constants are combinations of kernel lattice moments divided by
powers of the lattice rate w.  Constants that enter as upper bounds use
absolute (unsigned) moments; the three second-moment constants are exact
identities of the average-based operator and therefore use signed moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .functions import TestFunction, UnsupportedOrder, sup_norm_estimate
from .kernel2d import (
    MomentTable,
    TensorKernel2D,
    max_moment,
    moment_constancy_check,
)
from .operators import EvalGrid, apply_gbs, apply_gw, apply_sw, interior_margin

__all__ = [
    "BoundReport",
    "ConvergenceTable",
    "FunctionProfile",
    "KFunctionalConstants",
    "MissingProfileEntry",
    "b_differential_estimate",
    "build_bound_report",
    "convergence_study",
    "gbs_differential_bound",
    "gbs_modulus_bound",
    "gw_error_bound",
    "inverse_result_probe",
    "kfunctional_constants",
    "mixed_modulus_estimate",
    "polynomial_reproduction_check",
    "sw_remainder_bound",
]

PROFILE_ORDERS = [
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (2, 2),
]


class MissingProfileEntry(Exception):
    """The function profile lacks a sup norm required by a bound."""


@dataclass(frozen=True)
class FunctionProfile:
    """Sup norms of partial derivatives of one function over one box."""

    sup_norms: dict = field(repr=False)
    box: tuple[float, float, float, float]

    @classmethod
    def from_function(
        cls,
        f: TestFunction,
        box: tuple[float, float, float, float] | None = None,
        grid_n: int = 101,
    ) -> "FunctionProfile":
        if box is None:
            box = f.default_box
        norms = {}
        for idx in PROFILE_ORDERS:
            try:
                norms[idx] = sup_norm_estimate(f, idx, box, grid_n)
            except UnsupportedOrder:
                continue
        return cls(sup_norms=norms, box=box)

    def entry(self, index: tuple[int, int]) -> float:
        try:
            return self.sup_norms[index]
        except KeyError:
            raise MissingProfileEntry(f"profile lacks sup norm for order {index}") from None

    @property
    def second_order_max(self) -> float:
        """Largest sup norm among the three pure/mixed second partials."""
        return max(self.entry((2, 0)), self.entry((1, 1)), self.entry((0, 2)))


def gw_error_bound(
    profile: FunctionProfile,
    kernel: TensorKernel2D,
    r: int,
    c: float,
    w: float,
    grid_n: int = 64,
) -> float:
    """Sup-error bound for the sample-based series on a C^r function.

    ``c`` is the order-r moment plateau of the kernel and the derivative
    factor is the binomially weighted sum of products of pure-derivative sup
    norms; the bound decays like w^-r.
    """
    if r < 1:
        raise ValueError("moment order r must be >= 1")
    deriv = profile.entry((r, 0)) + profile.entry((0, r))
    for i in range(1, r):
        deriv += math.comb(r, i) * profile.entry((r - i, 0)) * profile.entry((0, i))
    mr = max_moment(kernel, r, grid_n)
    return (c / math.factorial(r)) * (mr / w**r) * deriv


def sw_remainder_bound(
    profile: FunctionProfile, kernel: TensorKernel2D, w: float, grid_n: int = 64
) -> float:
    """Bound on the second-order residual of the average-based series.

    (7 M / (12 w^2)) times the unsigned kernel mass, with M the largest
    second-derivative sup norm.
    """
    from .kernel2d import absolute_moment

    m = profile.second_order_max
    return (7.0 * m / (12.0 * w * w)) * absolute_moment(kernel, 0, 0, grid_n)


def _abs_moments(kernel: TensorKernel2D, eta_max: int, grid_n: int) -> dict:
    table = MomentTable.compute(kernel, eta_max=eta_max, grid_n=grid_n)
    return table.absolute_sup


def _modulus_constants(mom: dict, w: float) -> tuple[float, float, float]:
    lin_x = (mom[(0, 0)] + 2.0 * mom[(1, 0)]) / (2.0 * w)
    lin_y = (mom[(0, 0)] + 2.0 * mom[(0, 1)]) / (2.0 * w)
    bilin = (
        mom[(0, 0)] + 2.0 * mom[(1, 0)] + 2.0 * mom[(0, 1)] + 4.0 * mom[(1, 1)]
    ) / (4.0 * w * w)
    return lin_x, lin_y, bilin


def gbs_modulus_bound(
    kernel: TensorKernel2D,
    w: float,
    delta1: float,
    delta2: float,
    omega: float,
    grid_n: int = 64,
) -> float:
    """Boolean-sum error bound driven by the mixed modulus of smoothness.

    ``omega`` is (an upper estimate of) the mixed modulus of the target at
    (delta1, delta2); the three kernel constants scale like 1/w, 1/w and
    1/w^2.
    """
    if delta1 <= 0 or delta2 <= 0:
        raise ValueError("deltas must be positive")
    mom = _abs_moments(kernel, 2, grid_n)
    lin_x, lin_y, bilin = _modulus_constants(mom, w)
    return (1.0 + lin_x / delta1 + lin_y / delta2 + bilin / (delta1 * delta2)) * omega


def gbs_differential_bound(
    kernel: TensorKernel2D,
    w: float,
    delta1: float,
    delta2: float,
    db_sup: float,
    omega_db: float,
    grid_n: int = 64,
) -> float:
    """Boolean-sum error bound for targets with a bounded mixed differential.

    ``db_sup`` bounds the mixed differential itself, ``omega_db`` its mixed
    modulus at (delta1, delta2).  The four kernel constants scale like
    1/w^2, 1/w^3, 1/w^3 and 1/w^4.
    """
    if delta1 <= 0 or delta2 <= 0:
        raise ValueError("deltas must be positive")
    mom = _abs_moments(kernel, 4, grid_n)
    bilin = (
        mom[(0, 0)] + 2.0 * mom[(1, 0)] + 2.0 * mom[(0, 1)] + 4.0 * mom[(1, 1)]
    ) / (4.0 * w * w)
    cub_x = (
        mom[(0, 0)]
        + 3.0 * mom[(2, 0)]
        + 3.0 * mom[(1, 0)]
        + 2.0 * mom[(0, 1)]
        + 6.0 * mom[(2, 1)]
        + 6.0 * mom[(1, 1)]
    ) / (6.0 * w**3)
    cub_y = (
        mom[(0, 0)]
        + 3.0 * mom[(0, 2)]
        + 3.0 * mom[(0, 1)]
        + 2.0 * mom[(1, 0)]
        + 6.0 * mom[(1, 2)]
        + 6.0 * mom[(1, 1)]
    ) / (6.0 * w**3)
    quart = (
        mom[(0, 0)]
        + 3.0 * mom[(2, 0)]
        + 3.0 * mom[(0, 2)]
        + 3.0 * mom[(0, 1)]
        + 3.0 * mom[(1, 0)]
        + 9.0 * mom[(2, 2)]
        + 9.0 * mom[(1, 2)]
        + 9.0 * mom[(2, 1)]
        + 9.0 * mom[(1, 1)]
    ) / (9.0 * w**4)
    return bilin * (3.0 * db_sup + omega_db) + (
        cub_x / delta1 + cub_y / delta2 + quart / (delta1 * delta2)
    ) * omega_db


class KFunctionalConstants(NamedTuple):
    """Exact values of the average-based series applied to squared offsets."""

    sq_x: float
    sq_y: float
    sq_xy: float


def kfunctional_constants(
    kernel: TensorKernel2D, w: float, grid_n: int = 64
) -> KFunctionalConstants:
    """Identities for the series applied to (u-x)^2, (v-y)^2 and their product.

    These are exact evaluations, not upper bounds, so they combine signed
    moment means: odd-order moments enter with a minus sign.  For kernels
    whose moments of order 1..2 vanish they reduce to 1/(3w^2), 1/(3w^2)
    and 1/(9w^4).
    """
    need = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2)]
    m = {
        idx: moment_constancy_check(kernel, idx[0], idx[1], grid_n).value
        for idx in need
    }
    sq_x = (m[(0, 0)] + 3.0 * m[(2, 0)] - 3.0 * m[(1, 0)]) / (3.0 * w * w)
    sq_y = (m[(0, 0)] + 3.0 * m[(0, 2)] - 3.0 * m[(0, 1)]) / (3.0 * w * w)
    sq_xy = (
        m[(0, 0)]
        + 3.0 * m[(2, 0)]
        + 3.0 * m[(0, 2)]
        - 3.0 * m[(0, 1)]
        - 3.0 * m[(1, 0)]
        + 9.0 * m[(2, 2)]
        - 9.0 * m[(1, 2)]
        - 9.0 * m[(2, 1)]
        + 9.0 * m[(1, 1)]
    ) / (9.0 * w**4)
    return KFunctionalConstants(sq_x=sq_x, sq_y=sq_y, sq_xy=sq_xy)


def mixed_modulus_estimate(
    f: Callable,
    delta1: float,
    delta2: float,
    box: tuple[float, float, float, float],
    grid_n: int = 33,
) -> float:
    """Grid estimate (lower bound) of the mixed modulus of smoothness.

    Scans all pairs of grid points whose coordinate offsets are at most
    (delta1, delta2) and maximizes |f(x,y) - f(x,y0) - f(x0,y) + f(x0,y0)|.
    Restricting both corners to one fixed grid makes the estimate exactly
    monotone in each delta.
    """
    if delta1 < 0 or delta2 < 0:
        raise ValueError("deltas must be nonnegative")
    x0, y0, x1, y1 = box
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    xs = np.linspace(x0, x1, grid_n)
    ys = np.linspace(y0, y1, grid_n)
    vals = np.asarray(f(xs[:, None], ys[None, :]), dtype=float)
    hx = (x1 - x0) / (grid_n - 1)
    hy = (y1 - y0) / (grid_n - 1)
    m1 = min(grid_n - 1, int(math.floor(delta1 / hx))) if hx > 0 else 0
    m2 = min(grid_n - 1, int(math.floor(delta2 / hy))) if hy > 0 else 0
    best = 0.0
    for sx in range(1, m1 + 1):
        for sy in range(1, m2 + 1):
            diff = (
                vals[sx:, sy:]
                - vals[sx:, :-sy]
                - vals[:-sx, sy:]
                + vals[:-sx, :-sy]
            )
            best = max(best, float(np.abs(diff).max()))
    return best


def b_differential_estimate(f: Callable, x0: float, y0: float, h: float) -> float:
    """Mixed second difference quotient at (x0, y0) with step h on both axes."""
    if h == 0:
        raise ValueError("step h must be nonzero")
    num = f(x0 + h, y0 + h) - f(x0 + h, y0) - f(x0, y0 + h) + f(x0, y0)
    return float(num) / (h * h)


@dataclass(frozen=True)
class ConvergenceTable:
    """Sup errors per lattice rate plus a log-log least-squares slope."""

    rows: tuple
    fitted_slope: float
    fit_residual: float

    @property
    def w_times_error(self) -> tuple:
        return tuple(w * e for w, e in self.rows)

    @property
    def w_error_decreasing(self) -> bool:
        """Whether w * sup_error strictly decreases along the rate list."""
        we = self.w_times_error
        return all(b < a for a, b in zip(we, we[1:]))

    def to_csv(self, path) -> None:
        lines = ["w,sup_error"]
        for w, e in self.rows:
            lines.append(f"{format(w, '.17g')},{format(e, '.17g')}")
        lines.append(f"slope,{format(self.fitted_slope, '.17g')}")
        from pathlib import Path

        Path(path).write_text("\n".join(lines) + "\n", newline="\n")


_OPERATORS = {
    "gw": lambda f, kernel, grid, quad_order: apply_gw(f, kernel, grid),
    "sw": apply_sw,
    "gbs": apply_gbs,
}


def convergence_study(
    f: Callable,
    kernel: TensorKernel2D,
    operator: str,
    w_list: Sequence[float],
    box: tuple[float, float, float, float],
    grid_n: int = 20,
    quad_order: int = 5,
) -> ConvergenceTable:
    """Sup error against the target on a fixed interior grid, per lattice rate.

    The grid is shrunk by the admissibility margin of the smallest rate so
    the same points are compared across the whole rate list; the slope is
    the least-squares fit of log error against log rate.
    """
    if len(w_list) < 2:
        raise ValueError("need at least two rates")
    if any(b <= a for a, b in zip(w_list, w_list[1:])):
        raise ValueError("w_list must be strictly increasing")
    try:
        op = _OPERATORS[operator]
    except KeyError:
        raise ValueError(f"unknown operator {operator!r}; use gw, sw or gbs") from None
    margin = interior_margin(kernel, min(w_list))
    rows = []
    for w in w_list:
        grid = EvalGrid.regular(box, grid_n, w, margin)
        approx = op(f, kernel, grid, quad_order)
        exact = np.array([float(f(x, y)) for x, y in grid.points])
        rows.append((float(w), float(np.abs(approx - exact).max())))
    logw = np.log([w for w, _ in rows])
    loge = np.log([max(e, 1e-300) for _, e in rows])
    coeffs = np.polyfit(logw, loge, 1)
    pred = np.polyval(coeffs, logw)
    residual = float(np.sqrt(np.mean((pred - loge) ** 2)))
    return ConvergenceTable(
        rows=tuple(rows), fitted_slope=float(coeffs[0]), fit_residual=residual
    )


def inverse_result_probe(
    g: Callable,
    kernel: TensorKernel2D,
    w_list: Sequence[float],
    box: tuple[float, float, float, float],
    grid_n: int = 20,
    quad_order: int = 5,
) -> ConvergenceTable:
    """Average-based convergence table for the ridge function f(x,y) = g(y-x).

    Functions of this form are exactly the ones whose average-based error
    decays faster than 1/w; consult ``w_error_decreasing`` on the result to
    read off the verdict.
    """

    def f(x, y):
        return g(y - x)

    return convergence_study(f, kernel, "sw", w_list, box, grid_n, quad_order)


def _monomials_upto(degree: int):
    return [
        (i, j)
        for total in range(degree + 1)
        for i in range(total, -1, -1)
        for j in [total - i]
    ]


def polynomial_reproduction_check(
    kernel: TensorKernel2D,
    r: int,
    w: float,
    box: tuple[float, float, float, float],
    grid_n: int = 5,
    operator: str = "gw",
    quad_order: int = 5,
) -> float:
    """Degree-preservation check on all monomials of total degree < r.

    For the sample-based operator, returns the largest deviation from exact
    reproduction.  For the average-based operator, which shifts polynomials
    instead of fixing them, returns the largest residual of an
    overdetermined same-degree polynomial fit to the operator output.
    """
    margin = interior_margin(kernel, w)
    grid = EvalGrid.regular(box, grid_n, w, margin)
    monos = _monomials_upto(r - 1)
    worst = 0.0
    if operator == "gw":
        for i, j in monos:
            p = lambda x, y, i=i, j=j: x**i * y**j
            approx = apply_gw(p, kernel, grid)
            exact = np.array([p(x, y) for x, y in grid.points])
            worst = max(worst, float(np.abs(approx - exact).max()))
        return worst
    if operator == "sw":
        design = np.column_stack(
            [grid.points[:, 0] ** i * grid.points[:, 1] ** j for i, j in monos]
        )
        for i, j in monos:
            p = lambda x, y, i=i, j=j: x**i * y**j
            approx = apply_sw(p, kernel, grid, quad_order)
            fit, *_ = np.linalg.lstsq(design, approx, rcond=None)
            worst = max(worst, float(np.abs(design @ fit - approx).max()))
        return worst
    raise ValueError(f"unknown operator {operator!r}; use gw or sw")


@dataclass(frozen=True)
class BoundReport:
    """Named bound constants for one kernel, rate, and function profile."""

    constants: dict
    inputs: dict

    def to_csv(self, path) -> None:
        from pathlib import Path

        lines = ["name,value"]
        for name, value in self.constants.items():
            lines.append(f"{name},{format(value, '.17g')}")
        for name, value in self.inputs.items():
            lines.append(f"input_{name},{format(value, '.17g')}")
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def build_bound_report(
    kernel: TensorKernel2D,
    w: float,
    profile: FunctionProfile,
    r: int | None = None,
    grid_n: int = 64,
) -> BoundReport:
    """Evaluate every bound constant at one rate for one function profile."""
    if r is None:
        r = kernel.moment_order
    table = MomentTable.compute(kernel, eta_max=max(r, 4), grid_n=grid_n)
    c = table.rth_moment_constant(r)
    mom = table.absolute_sup
    deriv = profile.entry((r, 0)) + profile.entry((0, r))
    for i in range(1, r):
        deriv += math.comb(r, i) * profile.entry((r - i, 0)) * profile.entry((0, i))
    lin_x, lin_y, bilin = _modulus_constants(mom, w)
    kf = kfunctional_constants(kernel, w, grid_n)
    constants = {
        "rate_deriv_factor": deriv,
        "rate_bound": (c / math.factorial(r)) * (table.max_by_order[r] / w**r) * deriv,
        "remainder": (7.0 * profile.second_order_max / (12.0 * w * w)) * mom[(0, 0)],
        "mod_lin_x": lin_x,
        "mod_lin_y": lin_y,
        "mod_bilin": bilin,
        "diff_bilin": bilin,
        "diff_x": (
            mom[(0, 0)] + 3.0 * mom[(2, 0)] + 3.0 * mom[(1, 0)]
            + 2.0 * mom[(0, 1)] + 6.0 * mom[(2, 1)] + 6.0 * mom[(1, 1)]
        ) / (6.0 * w**3),
        "diff_y": (
            mom[(0, 0)] + 3.0 * mom[(0, 2)] + 3.0 * mom[(0, 1)]
            + 2.0 * mom[(1, 0)] + 6.0 * mom[(1, 2)] + 6.0 * mom[(1, 1)]
        ) / (6.0 * w**3),
        "diff_bilin2": (
            mom[(0, 0)] + 3.0 * mom[(2, 0)] + 3.0 * mom[(0, 2)]
            + 3.0 * mom[(0, 1)] + 3.0 * mom[(1, 0)] + 9.0 * mom[(2, 2)]
            + 9.0 * mom[(1, 2)] + 9.0 * mom[(2, 1)] + 9.0 * mom[(1, 1)]
        ) / (9.0 * w**4),
        "kfun_x": kf.sq_x,
        "kfun_y": kf.sq_y,
        "kfun_xy": kf.sq_xy,
    }
    inputs = {
        "w": float(w),
        "r": float(r),
        "moment_constant": c,
        "max_abs_moment_r": table.max_by_order[r],
        "abs_mass": mom[(0, 0)],
    }
    return BoundReport(constants=constants, inputs=inputs)
