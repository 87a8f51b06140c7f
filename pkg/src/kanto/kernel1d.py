"""Univariate kernels: central B-splines and moment-corrected combinations.

The central B-spline of order ``n`` is the n-fold convolution of the unit
box, a compactly supported piecewise polynomial on ``[-n/2, n/2]``.  Linear
combinations of shifted B-splines can be tuned so that their discrete
lattice moments vanish up to a prescribed order; that vanishing is what
raises the approximation order of the sampling operators built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "CentralBSpline",
    "CombinationKernel",
    "Kernel1D",
    "ScaledKernel",
    "SingularSystem",
    "bspline_eval",
    "construct_combination_kernel",
    "discrete_moment",
    "kernel1d_eval",
]

# condition number above which the coefficient solve is rejected
SINGULARITY_THRESHOLD = 1e12


class SingularSystem(Exception):
    """The moment system defining the combination coefficients is numerically singular."""


def bspline_eval(n: int, t):
    """Evaluate the central B-spline of order ``n`` at ``t`` (scalar or array).

    Uses the truncated-power expansion

        M_n(t) = 1/(n-1)! * sum_{j=0}^{n-1} (-1)^j C(n,j) (n/2 + t - j)_+^{n-1}

    folded onto ``|t|`` so evaluation is exactly even, and returns exactly
    0.0 for ``|t| >= n/2`` (n >= 2).  The order-1 kernel is the unit box on
    ``(-1/2, 1/2)`` with midpoint value 1/2 at the jump, which keeps the
    lattice sum equal to 1 on dyadic grids.
    """
    if n < 1:
        raise ValueError("B-spline order must be >= 1")
    tt = np.abs(np.asarray(t, dtype=float))
    if n == 1:
        out = np.where(tt < 0.5, 1.0, np.where(tt == 0.5, 0.5, 0.0))
    else:
        acc = np.zeros_like(tt)
        for j in range(n):
            base = 0.5 * n + tt - j
            acc += ((-1) ** j * math.comb(n, j)) * np.maximum(base, 0.0) ** (n - 1)
        acc /= math.factorial(n - 1)
        out = np.where(tt < 0.5 * n, acc, 0.0)
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class CentralBSpline:
    """Central B-spline kernel of a given order (unit box for order 1)."""

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("B-spline order must be >= 1")

    @property
    def support(self) -> tuple[float, float]:
        half = 0.5 * self.order
        return (-half, half)

    @property
    def moment_order(self) -> int:
        # the first discrete moment vanishes identically from order 2 on;
        # the second is constant in u (= order/12) only from order 3 on
        return 2 if self.order >= 3 else 1

    def __call__(self, t):
        return bspline_eval(self.order, t)


@dataclass(frozen=True)
class CombinationKernel:
    """Linear combination of shifted central B-splines of one base order.

    ``shifts`` must be strictly increasing and match ``coefficients`` in
    length.  Kernels produced by :func:`construct_combination_kernel` have
    unit mass and discrete moments 1..base_order-1 identically zero.
    """

    base_order: int
    shifts: tuple[float, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(float(s) for s in self.shifts))
        object.__setattr__(
            self, "coefficients", tuple(float(a) for a in self.coefficients)
        )
        if self.base_order < 2:
            raise ValueError("base order must be >= 2")
        if len(self.shifts) != len(self.coefficients):
            raise ValueError("shifts and coefficients must have equal length")
        if len(self.shifts) != self.base_order:
            raise ValueError("need exactly base_order shifts")
        if any(b <= a for a, b in zip(self.shifts, self.shifts[1:])):
            raise ValueError("shifts must be strictly increasing")

    @property
    def support(self) -> tuple[float, float]:
        half = 0.5 * self.base_order
        return (self.shifts[0] - half, self.shifts[-1] + half)

    @property
    def moment_order(self) -> int:
        return self.base_order

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        acc = np.zeros_like(tt)
        for a, eps in zip(self.coefficients, self.shifts):
            acc += a * bspline_eval(self.base_order, tt - eps)
        if np.ndim(t) == 0:
            return float(acc)
        return acc


@dataclass(frozen=True)
class ScaledKernel:
    """A kernel multiplied by a constant factor (deliberately breaks unit mass)."""

    inner: "Kernel1D"
    factor: float

    @property
    def support(self) -> tuple[float, float]:
        return self.inner.support

    @property
    def moment_order(self) -> int:
        return self.inner.moment_order

    def __call__(self, t):
        return self.factor * self.inner(t)


Kernel1D = Union[CentralBSpline, CombinationKernel, ScaledKernel]


def kernel1d_eval(kernel: Kernel1D, t):
    """Evaluate any univariate kernel variant at ``t`` (dispatch helper)."""
    return kernel(t)


def discrete_moment(kernel: Kernel1D, eta: int, u, absolute: bool = False):
    """Lattice moment ``sum_k kernel(u-k) (u-k)^eta``, elementwise over ``u``.

    The sum runs over the finitely many integers inside the support window,
    so it is exact.  With ``absolute=True`` both kernel values and offsets
    enter with absolute value (the sup over u of that version is the
    absolute moment used in the error bounds).
    """
    lo, hi = kernel.support
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("kernel must have compact support")
    uu = np.asarray(u, dtype=float)
    kmin = math.ceil(float(np.min(uu)) - hi)
    kmax = math.floor(float(np.max(uu)) - lo)
    ks = np.arange(kmin, kmax + 1, dtype=float)
    offs = uu[..., None] - ks
    vals = kernel(offs)
    if absolute:
        contrib = np.abs(vals) * np.abs(offs) ** eta
    else:
        contrib = vals * offs**eta
    total = contrib.sum(axis=-1)
    if np.ndim(u) == 0:
        return float(total)
    return total


def _shifted_integer_moment(base: CentralBSpline, eps: float, eta: int) -> float:
    """sum over integers m of M_r(m - eps) m^eta, exact over the support window."""
    half = 0.5 * base.order
    ms = np.arange(math.ceil(eps - half), math.floor(eps + half) + 1, dtype=float)
    return float(np.sum(base(ms - eps) * ms**eta))


def construct_combination_kernel(r: int, shifts) -> CombinationKernel:
    """Solve for combination coefficients with unit mass and vanishing moments.

    Builds the r x r discrete moment system at base point 0: row ``eta``
    demands ``sum_k chi(-k) (-k)^eta = delta_{eta,0}`` for eta = 0..r-1.
    Because shifted B-spline lattice moments of order < r are independent
    of the base point, the conditions then hold at every u; the test suite
    checks that instead of assuming it.

    Raises :class:`SingularSystem` when the condition estimate of the
    moment matrix exceeds ``SINGULARITY_THRESHOLD``.
    """
    shifts = tuple(float(s) for s in shifts)
    if r < 2:
        raise ValueError("combination order must be >= 2")
    if len(shifts) != r:
        raise ValueError(f"need exactly {r} shifts, got {len(shifts)}")
    if any(b <= a for a, b in zip(shifts, shifts[1:])):
        raise ValueError("shifts must be strictly increasing")
    base = CentralBSpline(r)
    matrix = np.empty((r, r))
    for mu, eps in enumerate(shifts):
        for eta in range(r):
            matrix[eta, mu] = _shifted_integer_moment(base, eps, eta)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > SINGULARITY_THRESHOLD:
        raise SingularSystem(
            f"moment matrix condition {cond:.3e} exceeds {SINGULARITY_THRESHOLD:.0e}"
        )
    rhs = np.zeros(r)
    rhs[0] = 1.0
    coeffs = np.linalg.solve(matrix, rhs)
    return CombinationKernel(
        base_order=r, shifts=shifts, coefficients=tuple(coeffs)
    )
