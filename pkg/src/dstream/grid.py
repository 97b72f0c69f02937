"""Uniform Cartesian node lattices, nodal fields and boundary tagging.

Arrays are stored with shape ``(ny, nx)`` and indexed ``[j, i]`` so that a
row-major flattening walks ``i`` fastest, the same order used by the CSV
serialization.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid",
    "make_grid",
    "ScalarField",
    "VelocityField",
    "EdgeCondition",
    "BoundaryCondition",
    "INTERIOR",
    "DIRICHLET",
    "ZERO_GRADIENT",
    "OUTFLOW",
    "apply_boundary",
    "write_field_csv",
    "read_field_csv",
]

# node tags
INTERIOR = 0
DIRICHLET = 1
ZERO_GRADIENT = 2
OUTFLOW = 3

_KIND_CODES = {"dirichlet": DIRICHLET, "zero-gradient": ZERO_GRADIENT, "outflow": OUTFLOW}
_SIDES = ("left", "right", "bottom", "top")


class GridError(ValueError):
    """Raised for an inconsistent grid definition."""


@dataclass(frozen=True)
class Grid:
    """Node lattice ``x_i = x_min + i*dx``, ``y_j = y_min + j*dy``."""

    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def delta(self) -> float:
        """The common spacing (``dx == dy`` is enforced by :func:`make_grid`)."""
        return self.dx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.y_min + np.arange(self.ny) * self.dy

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def coordinate_of(self, i: int, j: int) -> tuple[float, float]:
        return (self.x_min + i * self.dx, self.y_min + j * self.dy)

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        """Nearest node index of a point."""
        i = int(round((x - self.x_min) / self.dx))
        j = int(round((y - self.y_min) / self.dy))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise GridError(f"point ({x}, {y}) lies outside the grid")
        return i, j

    def contains_index(self, i, j):
        return (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)


def make_grid(nx: int, ny: int, bounds: Sequence[Sequence[float]]) -> Grid:
    """Build a grid of ``nx`` by ``ny`` nodes over ``[[x0, x1], [y0, y1]]``.

    The stencil fans assume square spacing, so ``dx != dy`` is rejected.
    """
    (x0, x1), (y0, y1) = bounds
    if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
        raise GridError(f"need at least 2 nodes per axis, got {nx}x{ny}")
    if not (x1 > x0 and y1 > y0):
        raise GridError(f"bounds are not well ordered: {bounds}")
    grid = Grid(int(nx), int(ny), float(x0), float(x1), float(y0), float(y1))
    if not math.isclose(grid.dx, grid.dy, rel_tol=1e-12):
        raise GridError(f"non-square spacing dx={grid.dx!r} dy={grid.dy!r}")
    return grid


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridError("field holds non-finite values")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VelocityField:
    grid: Grid
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float)
        self.v = np.array(self.v, dtype=float)
        for name, arr in (("u", self.u), ("v", self.v)):
            if arr.shape != self.grid.shape:
                raise GridError(f"{name} shape {arr.shape} does not match grid {self.grid.shape}")
            if not np.all(np.isfinite(arr)):
                raise GridError(f"{name} holds non-finite values")

    @classmethod
    def uniform(cls, grid: Grid, u: float, v: float) -> "VelocityField":
        return cls(grid, np.full(grid.shape, float(u)), np.full(grid.shape, float(v)))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "VelocityField":
        X, Y = grid.meshgrid()
        u, v = fn(X, Y)
        return cls(grid, np.broadcast_to(u, grid.shape), np.broadcast_to(v, grid.shape))

    def sample(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Bilinear interpolation of the nodal velocities at arbitrary points."""
        g = self.grid
        fx = np.clip((np.asarray(x, dtype=float) - g.x_min) / g.dx, 0.0, g.nx - 1)
        fy = np.clip((np.asarray(y, dtype=float) - g.y_min) / g.dy, 0.0, g.ny - 1)
        i0 = np.minimum(np.floor(fx).astype(int), g.nx - 2)
        j0 = np.minimum(np.floor(fy).astype(int), g.ny - 2)
        tx = fx - i0
        ty = fy - j0

        def interp(a):
            return ((1 - tx) * (1 - ty) * a[j0, i0] + tx * (1 - ty) * a[j0, i0 + 1]
                    + (1 - tx) * ty * a[j0 + 1, i0] + tx * ty * a[j0 + 1, i0 + 1])

        return interp(self.u), interp(self.v)


@dataclass(frozen=True)
class EdgeCondition:
    """A condition on a segment of one side of the rectangle.

    ``lo``/``hi`` bound the segment along the side's own coordinate (``x`` for
    bottom/top, ``y`` for left/right). ``value`` is a constant or a callable
    ``value(x, y)`` and is only used for Dirichlet segments.
    """

    side: str
    kind: str
    value: float | Callable | None = None
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if self.side not in _SIDES:
            raise GridError(f"unknown side {self.side!r}")
        if self.kind not in _KIND_CODES:
            raise GridError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.value is None:
            raise GridError("a Dirichlet segment needs a value")

    def evaluate(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if callable(self.value):
            return np.broadcast_to(np.asarray(self.value(x, y), dtype=float), np.broadcast(x, y).shape)
        return np.full(np.broadcast(x, y).shape, float(self.value))


def _on_segment(edge: EdgeCondition, grid: Grid, x, y, tol):
    if edge.side in ("bottom", "top"):
        level = grid.y_min if edge.side == "bottom" else grid.y_max
        on_line = np.abs(y - level) <= tol
        along = x
    else:
        level = grid.x_min if edge.side == "left" else grid.x_max
        on_line = np.abs(x - level) <= tol
        along = y
    return on_line & (along >= edge.lo - tol) & (along <= edge.hi + tol)


@dataclass
class BoundaryCondition:
    """Boundary tagging of every perimeter node.

    Edges are resolved in the order given: a corner shared by two segments
    takes the first one listed. Perimeter nodes covered by no segment are
    tagged ``OUTFLOW`` and are computed by the scheme like interior nodes.
    """

    grid: Grid
    edges: list[EdgeCondition]
    kind: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)
    source: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = self.grid
        X, Y = g.meshgrid()
        tol = 1e-9 * g.delta
        perimeter = np.zeros(g.shape, dtype=bool)
        perimeter[0, :] = perimeter[-1, :] = perimeter[:, 0] = perimeter[:, -1] = True

        self.kind = np.full(g.shape, INTERIOR, dtype=np.int8)
        self.kind[perimeter] = OUTFLOW
        self.values = np.full(g.shape, np.nan)
        # flat index of the node a zero-gradient node copies from, -1 elsewhere
        self.source = np.full(g.shape, -1, dtype=np.int64)
        assigned = np.zeros(g.shape, dtype=bool)
        inward = {"bottom": (0, 1), "top": (0, -1), "left": (1, 0), "right": (-1, 0)}
        jj, ii = np.indices(g.shape)
        for edge in self.edges:
            hit = _on_segment(edge, g, X, Y, tol) & perimeter & ~assigned
            if not hit.any():
                continue
            assigned |= hit
            code = _KIND_CODES[edge.kind]
            self.kind[hit] = code
            if code == DIRICHLET:
                self.values[hit] = edge.evaluate(X[hit], Y[hit])
            elif code == ZERO_GRADIENT:
                di, dj = inward[edge.side]
                si, sj = ii[hit] + di, jj[hit] + dj
                if np.any(~g.contains_index(si, sj)) or np.any(perimeter[np.clip(sj, 0, g.ny - 1), np.clip(si, 0, g.nx - 1)]):
                    raise GridError(f"zero-gradient segment on {edge.side} has no interior neighbour")
                self.source[hit] = sj * g.nx + si
        if np.any(~np.isfinite(self.values[self.kind == DIRICHLET])):
            raise GridError("Dirichlet data must be finite")

    @property
    def swept(self) -> np.ndarray:
        """Mask of nodes whose value is computed by a scheme."""
        return (self.kind == INTERIOR) | (self.kind == OUTFLOW)

    def edge_value(self, x, y) -> np.ndarray:
        """Dirichlet data at arbitrary boundary points; NaN off Dirichlet segments."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        out = np.full(x.shape, np.nan)
        pending = np.ones(x.shape, dtype=bool)
        tol = 1e-9 * self.grid.delta
        for edge in self.edges:
            hit = _on_segment(edge, self.grid, x, y, tol) & pending
            if not hit.any():
                continue
            pending &= ~hit
            if edge.kind == "dirichlet":
                out[hit] = edge.evaluate(x[hit], y[hit])
        return out

    def data_bounds(self) -> tuple[float, float]:
        """Min and max of the Dirichlet data over the boundary nodes."""
        vals = self.values[self.kind == DIRICHLET]
        return float(vals.min()), float(vals.max())


def apply_boundary(field: ScalarField, bc: BoundaryCondition) -> ScalarField:
    """Return a copy with Dirichlet values imposed and zero-gradient nodes refreshed."""
    if field.grid != bc.grid:
        raise GridError("field and boundary condition live on different grids")
    out = field.values.copy()
    dirichlet = bc.kind == DIRICHLET
    out[dirichlet] = bc.values[dirichlet]
    zg = bc.kind == ZERO_GRADIENT
    out[zg] = out.ravel()[bc.source[zg]]
    return ScalarField(field.grid, out)


def write_field_csv(field: ScalarField, path) -> None:
    """Write ``x,y,phi`` rows, ``j`` outer and ``i`` inner, 17 significant digits."""
    X, Y = field.grid.meshgrid()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "phi"])
        for x, y, p in zip(X.ravel(), Y.ravel(), field.values.ravel()):
            writer.writerow([f"{x:.17g}", f"{y:.17g}", f"{p:.17g}"])


def read_field_csv(path) -> ScalarField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = make_grid(len(xs), len(ys), [[xs[0], xs[-1]], [ys[0], ys[-1]]])
    return ScalarField(grid, data[:, 2].reshape(grid.shape))
