"""Tensor-product bivariate kernels and their lattice moments.

All moment quantities here are finite sums over the integer lattice inside
the kernel support window.  Algebraic moments keep signs; absolute moments
take absolute values of both kernel and offsets and are reported as a sup
over a grid on the periodicity cell [0,1)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .kernel1d import Kernel1D, discrete_moment

__all__ = [
    "CONSTANCY_TOL",
    "MomentConstancy",
    "MomentTable",
    "TensorKernel2D",
    "UnsupportedKernel",
    "absolute_moment",
    "absolute_moment_at",
    "algebraic_moment",
    "max_moment",
    "max_support_radius",
    "moment_constancy_check",
    "partition_of_unity_check",
    "validate_kernel",
]

# spread threshold below which a lattice moment counts as constant in (u,v)
CONSTANCY_TOL = 1e-10


class UnsupportedKernel(Exception):
    """The kernel is outside the supported class (e.g. lacks compact support)."""


@dataclass(frozen=True)
class TensorKernel2D:
    """Product kernel chi(x, y) = kx(x) * ky(y) of two univariate factors."""

    kx: Kernel1D
    ky: Kernel1D

    @property
    def support_x(self) -> tuple[float, float]:
        return self.kx.support

    @property
    def support_y(self) -> tuple[float, float]:
        return self.ky.support

    @property
    def moment_order(self) -> int:
        return min(self.kx.moment_order, self.ky.moment_order)

    def __call__(self, a, b):
        return self.kx(a) * self.ky(b)


def _require_compact(kernel: TensorKernel2D) -> None:
    for lo, hi in (kernel.support_x, kernel.support_y):
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise UnsupportedKernel("kernel factor lacks compact support")


def max_support_radius(kernel: TensorKernel2D) -> float:
    """Largest |support endpoint| over both axes; sets the lattice window size."""
    _require_compact(kernel)
    return max(
        abs(v) for pair in (kernel.support_x, kernel.support_y) for v in pair
    )


def _unit_grid(grid_n: int) -> np.ndarray:
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    return np.arange(grid_n, dtype=float) / grid_n


def algebraic_moment(
    kernel: TensorKernel2D, p1: int, p2: int, u: float, v: float
) -> float:
    """Signed lattice moment sum_{k,j} chi(u-k, v-j) (u-k)^p1 (v-j)^p2.

    For a tensor kernel the double sum factors into the product of the two
    axis moments; both factors are exact finite sums.
    """
    _require_compact(kernel)
    return discrete_moment(kernel.kx, p1, u) * discrete_moment(kernel.ky, p2, v)


def absolute_moment_at(
    kernel: TensorKernel2D, p1: int, p2: int, u: float, v: float
) -> float:
    """Unsigned moment sum at a single point: |chi| and |offsets| throughout."""
    _require_compact(kernel)
    return discrete_moment(kernel.kx, p1, u, absolute=True) * discrete_moment(
        kernel.ky, p2, v, absolute=True
    )


def absolute_moment(
    kernel: TensorKernel2D, p1: int, p2: int, grid_n: int = 64
) -> float:
    """Sup (grid max over [0,1)^2) of the unsigned moment sum.

    The summand is 1-periodic in each variable, so the unit cell grid is
    enough; ``grid_n`` points per axis.
    """
    _require_compact(kernel)
    us = _unit_grid(grid_n)
    ax = discrete_moment(kernel.kx, p1, us, absolute=True)
    ay = discrete_moment(kernel.ky, p2, us, absolute=True)
    return float(np.outer(ax, ay).max())


def max_moment(kernel: TensorKernel2D, eta: int, grid_n: int = 64) -> float:
    """Max of the absolute moments over all index pairs with p1 + p2 = eta."""
    return max(
        absolute_moment(kernel, p1, eta - p1, grid_n) for p1 in range(eta + 1)
    )


@dataclass(frozen=True)
class MomentConstancy:
    """Outcome of a moment constancy scan over the unit cell."""

    constant: bool
    value: float
    spread: float


def moment_constancy_check(
    kernel: TensorKernel2D, p1: int, p2: int, grid_n: int = 64
) -> MomentConstancy:
    """Scan the algebraic moment over a grid on [0,1)^2.

    Returns its mean, max-minus-min spread, and whether the spread is below
    ``CONSTANCY_TOL``.  Kernels built for approximation order r are expected
    to be constant for all p1 + p2 < r.
    """
    _require_compact(kernel)
    us = _unit_grid(grid_n)
    ax = discrete_moment(kernel.kx, p1, us)
    ay = discrete_moment(kernel.ky, p2, us)
    grid = np.outer(ax, ay)
    spread = float(grid.max() - grid.min())
    return MomentConstancy(
        constant=spread <= CONSTANCY_TOL,
        value=float(grid.mean()),
        spread=spread,
    )


def partition_of_unity_check(kernel: TensorKernel2D, grid_n: int = 64) -> float:
    """Max deviation of sum_{k,j} chi(u-k, v-j) from 1 over the unit cell grid."""
    _require_compact(kernel)
    us = _unit_grid(grid_n)
    ax = discrete_moment(kernel.kx, 0, us)
    ay = discrete_moment(kernel.ky, 0, us)
    return float(np.abs(np.outer(ax, ay) - 1.0).max())


def validate_kernel(
    kernel: TensorKernel2D, grid_n: int = 16, tol: float = 1e-8
) -> None:
    """Check the admission conditions: compact support, boundedness, unit mass.

    Compact support makes integrability and finite absolute moments
    automatic, so the one quantitative check is the partition of unity.
    Raises :class:`UnsupportedKernel` on failure.
    """
    _require_compact(kernel)
    deviation = partition_of_unity_check(kernel, grid_n)
    if not np.isfinite(deviation) or deviation > tol:
        raise UnsupportedKernel(
            f"partition of unity deviates by {deviation:.3e} (tolerance {tol:.0e})"
        )


@dataclass(frozen=True)
class MomentTable:
    """Precomputed moment summary for all index pairs with p1 + p2 <= eta_max."""

    eta_max: int
    grid_n: int
    algebraic_mean: dict = field(repr=False)
    algebraic_spread: dict = field(repr=False)
    absolute_sup: dict = field(repr=False)
    max_by_order: dict

    @classmethod
    def compute(
        cls, kernel: TensorKernel2D, eta_max: int = 3, grid_n: int = 64
    ) -> "MomentTable":
        return _moment_table_cached(kernel, eta_max, grid_n)

    def index_pairs(self):
        return sorted(self.algebraic_mean, key=lambda p: (p[0] + p[1], -p[0]))

    def rth_moment_constant(self, r: int) -> float:
        """Magnitude of the order-r moment plateau: max |mean| over p1+p2 = r.

        The example kernels have their order-r moment only approximately
        constant in (u, v) and not equal across index pairs, so the single
        constant entering the convergence-rate bound is taken conservatively
        as the largest mean magnitude.
        """
        if r > self.eta_max:
            raise ValueError(f"table only holds orders <= {self.eta_max}")
        return max(
            abs(self.algebraic_mean[(p1, r - p1)]) for p1 in range(r + 1)
        )


@lru_cache(maxsize=64)
def _moment_table_cached(
    kernel: TensorKernel2D, eta_max: int, grid_n: int
) -> MomentTable:
    _require_compact(kernel)
    mean: dict = {}
    spread: dict = {}
    sup: dict = {}
    max_by_order: dict = {}
    for eta in range(eta_max + 1):
        best = 0.0
        for p1 in range(eta + 1):
            p2 = eta - p1
            mc = moment_constancy_check(kernel, p1, p2, grid_n)
            mean[(p1, p2)] = mc.value
            spread[(p1, p2)] = mc.spread
            sup[(p1, p2)] = absolute_moment(kernel, p1, p2, grid_n)
            best = max(best, sup[(p1, p2)])
        max_by_order[eta] = best
    return MomentTable(
        eta_max=eta_max,
        grid_n=grid_n,
        algebraic_mean=mean,
        algebraic_spread=spread,
        absolute_sup=sup,
        max_by_order=max_by_order,
    )
