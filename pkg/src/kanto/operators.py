"""Sampling-series operators over the scaled integer lattice.

Three reconstruction operators share one evaluation pattern: a finite,
kernel-weighted sum over the lattice window around each evaluation point.
They differ in what is summed per lattice cell:

* point samples f(k/w, j/w),
* cell averages of f over [k/w,(k+1)/w] x [j/w,(j+1)/w],
* the boolean-sum cell integrand f(x,v) + f(u,y) - f(u,v), which makes the
  operator exact on additively separable functions.

Accumulation per point runs in ascending (k, j) order with a plain scalar
accumulator, so results are reproducible bit for bit regardless of the
thread count (KANTO_THREADS only distributes whole points over threads).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .functions import TestFunction
from .kernel2d import TensorKernel2D, _require_compact, max_support_radius

__all__ = [
    "CatalogMissingDerivative",
    "EvalGrid",
    "LatticeField",
    "MissingData",
    "SourceField",
    "admissible_box",
    "apply_gbs",
    "apply_gw",
    "apply_sw",
    "cell_average",
    "read_lattice_csv",
    "read_pgm",
    "representation_residual",
    "write_lattice_csv",
]

KIND_SAMPLES = "samples"
KIND_CELL_AVERAGES = "cell_averages"


class MissingData(Exception):
    """A lattice sample required by the evaluation window is absent."""

    def __init__(self, k: int, j: int):
        super().__init__(f"missing lattice value at (k={k}, j={j})")
        self.k = k
        self.j = j


class CatalogMissingDerivative(Exception):
    """The analytic field lacks a first partial needed by the computation."""


@dataclass
class LatticeField:
    """Dense rectangle of lattice data: values[k - kmin, j - jmin].

    ``kind`` says whether entries are point samples or cell averages.
    Absent interior entries are NaN and raise :class:`MissingData` on access.
    """

    w: float
    kind: str
    values: np.ndarray
    kmin: int
    jmin: int

    def __post_init__(self):
        if self.kind not in (KIND_SAMPLES, KIND_CELL_AVERAGES):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.w <= 0:
            raise ValueError("lattice rate w must be positive")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-d array")

    @property
    def kmax(self) -> int:
        return self.kmin + self.values.shape[0] - 1

    @property
    def jmax(self) -> int:
        return self.jmin + self.values.shape[1] - 1

    def get(self, k: int, j: int) -> float:
        if not (self.kmin <= k <= self.kmax and self.jmin <= j <= self.jmax):
            raise MissingData(k, j)
        val = self.values[k - self.kmin, j - self.jmin]
        if math.isnan(val):
            raise MissingData(k, j)
        return float(val)

    @classmethod
    def from_function(
        cls,
        f: Callable,
        w: float,
        kmin: int,
        kmax: int,
        jmin: int,
        jmax: int,
        kind: str = KIND_SAMPLES,
        quad_order: int = 5,
    ) -> "LatticeField":
        """Tabulate a function on the lattice rectangle, as samples or averages."""
        values = np.empty((kmax - kmin + 1, jmax - jmin + 1))
        for k in range(kmin, kmax + 1):
            for j in range(jmin, jmax + 1):
                if kind == KIND_SAMPLES:
                    values[k - kmin, j - jmin] = f(k / w, j / w)
                else:
                    values[k - kmin, j - jmin] = cell_average(f, k, j, w, quad_order)
        return cls(w=w, kind=kind, values=values, kmin=kmin, jmin=jmin)


SourceField = Union[TestFunction, LatticeField, Callable]


@dataclass(frozen=True)
class EvalGrid:
    """Evaluation points (N x 2 array, row-major build order) at lattice rate w."""

    points: np.ndarray
    w: float

    def __post_init__(self):
        object.__setattr__(
            self, "points", np.asarray(self.points, dtype=float).reshape(-1, 2)
        )
        if self.w <= 0:
            raise ValueError("lattice rate w must be positive")

    @classmethod
    def regular(
        cls,
        box: tuple[float, float, float, float],
        grid_n: int,
        w: float,
        margin: float = 0.0,
    ) -> "EvalGrid":
        """Regular grid_n x grid_n grid on the box shrunk by margin on all sides.

        Points are ordered row-major: x varies slowest, y fastest.
        """
        x0, y0, x1, y1 = box
        if grid_n < 1:
            raise ValueError("grid_n must be >= 1")
        if x0 + margin > x1 - margin or y0 + margin > y1 - margin:
            raise ValueError("margin leaves an empty interior")
        xs = np.linspace(x0 + margin, x1 - margin, grid_n)
        ys = np.linspace(y0 + margin, y1 - margin, grid_n)
        pts = [(x, y) for x in xs for y in ys]
        return cls(points=np.array(pts), w=w)


def _thread_count() -> int:
    raw = os.environ.get("KANTO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_indexed(func: Callable[[int], float], n: int) -> list:
    threads = _thread_count()
    if threads == 1 or n < 2:
        return [func(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(n)))


@lru_cache(maxsize=16)
def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quad_order must be >= 1")
    return np.polynomial.legendre.leggauss(order)


def cell_average(f: Callable, k: int, j: int, w: float, quad_order: int = 5) -> float:
    """Mean of f over the lattice cell [k/w,(k+1)/w] x [j/w,(j+1)/w].

    Tensor Gauss-Legendre rule, exact for polynomial degree up to
    2*quad_order - 1 per axis.
    """
    nodes, weights = _gauss_rule(quad_order)
    acc = 0.0
    for gi, wi in zip(nodes, weights):
        u = (k + 0.5 * (gi + 1.0)) / w
        row = 0.0
        for gl, wl in zip(nodes, weights):
            v = (j + 0.5 * (gl + 1.0)) / w
            row += wl * f(u, v)
        acc += wi * row
    # per-axis weights sum to 2; 1/4 turns the integral rule into a mean
    return float(0.25 * acc)


def _lattice_window(t: float, lo: float, hi: float) -> range:
    # chi(t - k) can be nonzero only for t - hi < k < t - lo; endpoint hits
    # evaluate to exactly zero and are harmless
    return range(math.ceil(t - hi), math.floor(t - lo) + 1)


def _check_coverage(field: LatticeField, kernel: TensorKernel2D, grid: EvalGrid):
    lox, hix = kernel.support_x
    loy, hiy = kernel.support_y
    for x, y in grid.points:
        ks = _lattice_window(grid.w * x, lox, hix)
        js = _lattice_window(grid.w * y, loy, hiy)
        for k in (ks.start, ks.stop - 1):
            if not field.kmin <= k <= field.kmax:
                raise MissingData(k, js.start)
        for j in (js.start, js.stop - 1):
            if not field.jmin <= j <= field.jmax:
                raise MissingData(ks.start, j)


def _resolve_sample_source(field: SourceField, w: float) -> Callable[[int, int], float]:
    if isinstance(field, LatticeField):
        if field.kind != KIND_SAMPLES:
            raise ValueError("sample-based operator needs a field of kind 'samples'")
        if field.w != w:
            raise ValueError("lattice rate of field and grid disagree")
        return field.get
    f = field

    def value(k: int, j: int) -> float:
        return f(k / w, j / w)

    return value


def _resolve_average_source(
    field: SourceField, w: float, quad_order: int
) -> Callable[[int, int], float]:
    if isinstance(field, LatticeField):
        if field.kind != KIND_CELL_AVERAGES:
            raise ValueError(
                "average-based operator needs a field of kind 'cell_averages'"
            )
        if field.w != w:
            raise ValueError("lattice rate of field and grid disagree")
        return field.get
    f = field
    cache: dict = {}

    def value(k: int, j: int) -> float:
        key = (k, j)
        got = cache.get(key)
        if got is None:
            got = cell_average(f, k, j, w, quad_order)
            cache[key] = got
        return got

    return value


def _windowed_sum(
    kernel: TensorKernel2D, grid: EvalGrid, value: Callable[[int, int], float]
) -> np.ndarray:
    lox, hix = kernel.support_x
    loy, hiy = kernel.support_y
    w = grid.w
    pts = grid.points

    def at(i: int) -> float:
        x, y = pts[i]
        t1 = w * x
        t2 = w * y
        ks = _lattice_window(t1, lox, hix)
        js = _lattice_window(t2, loy, hiy)
        cx = kernel.kx(t1 - np.arange(ks.start, ks.stop, dtype=float))
        cy = kernel.ky(t2 - np.arange(js.start, js.stop, dtype=float))
        acc = 0.0
        for a, k in zip(cx, ks):
            for b, j in zip(cy, js):
                acc += (a * b) * value(k, j)
        return float(acc)

    return np.array(_map_indexed(at, len(pts)))


def apply_gw(field: SourceField, kernel: TensorKernel2D, grid: EvalGrid) -> np.ndarray:
    """Sampling series from point samples: sum chi(wx-k, wy-j) f(k/w, j/w)."""
    _require_compact(kernel)
    if isinstance(field, LatticeField):
        _check_coverage(field, kernel, grid)
    value = _resolve_sample_source(field, grid.w)
    return _windowed_sum(kernel, grid, value)


def apply_sw(
    field: SourceField,
    kernel: TensorKernel2D,
    grid: EvalGrid,
    quad_order: int = 5,
) -> np.ndarray:
    """Sampling series from cell averages instead of point samples.

    An analytic field has its cell averages computed on demand with the
    same quadrature as :meth:`LatticeField.from_function`, so both routes
    produce identical floating-point output.
    """
    _require_compact(kernel)
    if isinstance(field, LatticeField):
        _check_coverage(field, kernel, grid)
    value = _resolve_average_source(field, grid.w, quad_order)
    return _windowed_sum(kernel, grid, value)


def apply_gbs(
    field: Union[TestFunction, Callable],
    kernel: TensorKernel2D,
    grid: EvalGrid,
    quad_order: int = 5,
) -> np.ndarray:
    """Boolean-sum operator: cell averages of f(x,v) + f(u,y) - f(u,v).

    The first two terms reduce to single-axis means through the evaluation
    point and reuse the same quadrature nodes as the full tensor rule, so
    the three terms cancel exactly (to rounding) on additively separable
    functions.  Needs an analytic field.
    """
    _require_compact(kernel)
    if isinstance(field, LatticeField):
        raise ValueError("boolean-sum operator needs an analytic field")
    f = field
    lox, hix = kernel.support_x
    loy, hiy = kernel.support_y
    w = grid.w
    pts = grid.points
    nodes, weights = _gauss_rule(quad_order)

    def at(i: int) -> float:
        x, y = pts[i]
        t1 = w * x
        t2 = w * y
        ks = _lattice_window(t1, lox, hix)
        js = _lattice_window(t2, loy, hiy)
        cx = kernel.kx(t1 - np.arange(ks.start, ks.stop, dtype=float))
        cy = kernel.ky(t2 - np.arange(js.start, js.stop, dtype=float))
        mean_u: dict = {}
        mean_v: dict = {}
        acc = 0.0
        for a, k in zip(cx, ks):
            mu = mean_u.get(k)
            if mu is None:
                mu = 0.0
                for gi, wi in zip(nodes, weights):
                    mu += 0.5 * wi * f((k + 0.5 * (gi + 1.0)) / w, y)
                mean_u[k] = mu
            for b, j in zip(cy, js):
                mv = mean_v.get(j)
                if mv is None:
                    mv = 0.0
                    for gl, wl in zip(nodes, weights):
                        mv += 0.5 * wl * f(x, (j + 0.5 * (gl + 1.0)) / w)
                    mean_v[j] = mv
                m2 = cell_average(f, k, j, w, quad_order)
                acc += (a * b) * (mv + mu - m2)
        return float(acc)

    return np.array(_map_indexed(at, len(pts)))


def representation_residual(
    f: TestFunction,
    kernel: TensorKernel2D,
    grid: EvalGrid,
    quad_order: int = 5,
) -> np.ndarray:
    """Second-order residual of the average-based series.

    Subtracts from the average-based operator its sample-based expansion:
    the sample series of f plus 1/(2w) times the sample series of each
    first partial.  Needs both first partials in closed form.
    """
    fx = f.partial(1, 0)
    fy = f.partial(0, 1)
    if fx is None or fy is None:
        raise CatalogMissingDerivative(
            f"function {f.name!r} lacks a closed-form first partial"
        )
    sw = apply_sw(f, kernel, grid, quad_order)
    gw = apply_gw(f, kernel, grid)
    gwx = apply_gw(fx, kernel, grid)
    gwy = apply_gw(fy, kernel, grid)
    return sw - gw - (gwx + gwy) / (2.0 * grid.w)


def admissible_box(
    field: LatticeField, kernel: TensorKernel2D
) -> tuple[float, float, float, float]:
    """Largest box whose every point has its full lattice window inside the field."""
    lox, hix = kernel.support_x
    loy, hiy = kernel.support_y
    w = field.w
    box = (
        (field.kmin + hix) / w,
        (field.jmin + hiy) / w,
        (field.kmax + lox) / w,
        (field.jmax + loy) / w,
    )
    if box[0] > box[2] or box[1] > box[3]:
        raise ValueError("field too small for the kernel window")
    return box


def interior_margin(kernel: TensorKernel2D, w: float) -> float:
    """Margin (s_max + 1)/w keeping every lattice window strictly interior."""
    return (max_support_radius(kernel) + 1.0) / w


# -- lattice I/O ---------------------------------------------------------

def _meta_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def write_lattice_csv(field: LatticeField, path) -> None:
    """Write k,j,value rows plus a .meta.json sidecar with rate, kind, bounds."""
    path = Path(path)
    lines = ["k,j,value"]
    for k in range(field.kmin, field.kmax + 1):
        for j in range(field.jmin, field.jmax + 1):
            val = field.values[k - field.kmin, j - field.jmin]
            if not math.isnan(val):
                lines.append(f"{k},{j},{format(val, '.17g')}")
    path.write_text("\n".join(lines) + "\n", newline="\n")
    meta = {
        "w": field.w,
        "kind": field.kind,
        "kmin": field.kmin,
        "kmax": field.kmax,
        "jmin": field.jmin,
        "jmax": field.jmax,
    }
    _meta_path(path).write_text(json.dumps(meta, indent=2) + "\n", newline="\n")


def read_lattice_csv(path) -> LatticeField:
    """Read a k,j,value CSV with its .meta.json sidecar; absent cells become NaN."""
    path = Path(path)
    meta = json.loads(_meta_path(path).read_text())
    kmin, kmax = int(meta["kmin"]), int(meta["kmax"])
    jmin, jmax = int(meta["jmin"]), int(meta["jmax"])
    values = np.full((kmax - kmin + 1, jmax - jmin + 1), np.nan)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "k,j,value":
        raise ValueError(f"{path}: expected header 'k,j,value'")
    for line in lines[1:]:
        if not line.strip():
            continue
        k_s, j_s, v_s = line.split(",")
        k, j = int(k_s), int(j_s)
        if not (kmin <= k <= kmax and jmin <= j <= jmax):
            raise ValueError(f"{path}: index ({k},{j}) outside declared bounds")
        values[k - kmin, j - jmin] = float(v_s)
    return LatticeField(
        w=float(meta["w"]),
        kind=str(meta["kind"]),
        values=values,
        kmin=kmin,
        jmin=jmin,
    )


def read_pgm(path) -> LatticeField:
    """Read a binary (P5) PGM with maxval 255 as unit-rate point samples in [0,1].

    Pixel (row r, column c) becomes the sample at lattice index (k=c, j=r).
    """
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    magic, width_s, height_s, maxval_s = tokens
    if magic != b"P5":
        raise ValueError("only binary (P5) PGM is supported")
    width, height, maxval = int(width_s), int(height_s), int(maxval_s)
    if maxval != 255:
        raise ValueError("only maxval 255 PGM is supported")
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError("PGM raster truncated")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    values = pixels.T.astype(float) / 255.0
    return LatticeField(w=1.0, kind=KIND_SAMPLES, values=values, kmin=0, jmin=0)
