"""Benchmark problems with exact solutions.

Three uniform-flow problems carry an inlet profile ``g(s)`` along the
characteristic coordinate ``s = x - (u/v) y`` on the unit square; the
Smith-Hutton problem transports a ``tanh`` front around a semicircular flow on
``[-1, 1] x [0, 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import BoundaryCondition, EdgeCondition, Grid, ScalarField, VelocityField, make_grid

__all__ = [
    "ProblemSpec",
    "SmithHuttonParams",
    "ErrorMetrics",
    "PROFILE_KINDS",
    "PROBLEMS",
    "TVD_RELAXATION",
    "SMITH_HUTTON_LADDER",
    "make_profile_problem",
    "make_smith_hutton",
    "make_problem",
    "exact_field",
    "error_metrics",
    "extract_profile",
    "trace_to_inlet",
    "smith_hutton_velocity",
]

PROFILE_KINDS = ("step", "double-step", "sine")
SMITH_HUTTON_LADDER = ((20, 10), (40, 20), (80, 40), (160, 80), (320, 160))

# under-relaxation per TVD limiter, tuned per problem
TVD_RELAXATION = {
    "step": {"minmod": 0.95, "quick": 0.95, "superbee": 0.95},
    "double-step": {"minmod": 1.0, "quick": 0.95, "superbee": 0.9},
    "sine": {"minmod": 0.95, "quick": 0.9, "superbee": 0.85},
    "smith-hutton": {"minmod": 0.95, "quick": 0.85, "superbee": 0.1},
}

# jumps are resolved with this slack so that a node sitting on a
# discontinuity evaluates the same whichever way its coordinate was rounded
_JUMP_TOL = 1e-12


def _window(s, lo, hi):
    return (s >= lo - _JUMP_TOL) & (s < hi - _JUMP_TOL)


def step_profile(s, edge=0.2):
    s = np.asarray(s, dtype=float)
    return np.where(s < edge - _JUMP_TOL, 1.0, 0.0)


def double_step_profile(s, windows=((0.1, 0.3), (0.5, 0.7))):
    s = np.asarray(s, dtype=float)
    inside = np.zeros(s.shape, dtype=bool)
    for lo, hi in windows:
        inside |= _window(s, lo, hi)
    return inside.astype(float)


def sine_profile(s, start=0.0, width=0.6):
    s = np.asarray(s, dtype=float)
    return np.where(_window(s, start, start + width), np.sin(np.pi * (s - start) / width) ** 2, 0.0)


_PROFILES = {"step": step_profile, "double-step": double_step_profile, "sine": sine_profile}


@dataclass
class ProblemSpec:
    name: str
    grid: Grid
    velocity: VelocityField
    boundary: BoundaryCondition
    exact: Callable
    label: str = ""
    velocity_fn: Callable | None = None
    inlet: Callable | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SmithHuttonParams:
    alpha: float = 1000.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma != 0:
            raise ValueError("only the pure-advection case (gamma = 0) is supported")


def make_profile_problem(kind: str, nx: int = 30, ny: int = 30, u: float = 0.8, v: float = 1.0,
                         profile: Callable | None = None) -> ProblemSpec:
    """Uniform flow over the unit square with inflow on the bottom and left edges.

    ``nx``/``ny`` count nodes. ``profile`` overrides the default placement of
    the inlet shape as a function of ``s = x - (u/v) y``.
    """
    if kind not in _PROFILES:
        raise ValueError(f"unknown profile {kind!r}; choose from {PROFILE_KINDS}")
    if nx != ny:
        raise ValueError("profile problems use a square node lattice")
    if not (u > 0 and v > 0):
        raise ValueError("inflow edges are bottom and left, so u and v must be positive")
    g = profile or _PROFILES[kind]
    slope = u / v
    grid = make_grid(nx, ny, [[0.0, 1.0], [0.0, 1.0]])

    def exact(x, y):
        return g(np.asarray(x, dtype=float) - slope * np.asarray(y, dtype=float))

    bc = BoundaryCondition(grid, [
        EdgeCondition("bottom", "dirichlet", exact),
        EdgeCondition("left", "dirichlet", exact),
    ])
    return ProblemSpec(
        name=kind,
        grid=grid,
        velocity=VelocityField.uniform(grid, u, v),
        boundary=bc,
        exact=exact,
        label=f"{nx}x{ny}",
        velocity_fn=lambda x, y: (np.full(np.shape(x), u), np.full(np.shape(y), v)),
        inlet=g,
        params={"u": u, "v": v},
    )


def smith_hutton_velocity(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2 * y * (1 - x**2), -2 * x * (1 - y**2)


def make_smith_hutton(nx: int = 40, ny: int = 20, alpha: float = 1000.0,
                      exact_method: str = "streamfunction") -> ProblemSpec:
    """Smith-Hutton problem on ``nx`` by ``ny`` square cells (``nx+1`` by ``ny+1`` nodes).

    The exact field uses the conserved streamfunction by default;
    ``exact_method="rk4"`` traces every node back to the inlet instead.
    """
    params = SmithHuttonParams(alpha)
    if nx != 2 * ny:
        raise ValueError("the [-1,1]x[0,1] domain needs nx = 2*ny for square cells")
    grid = make_grid(nx + 1, ny + 1, [[-1.0, 1.0], [0.0, 1.0]])
    wall = 1 - math.tanh(alpha)

    def inlet(x):
        return 1 + np.tanh(alpha * (2 * np.asarray(x, dtype=float) + 1))

    bc = BoundaryCondition(grid, [
        EdgeCondition("bottom", "dirichlet", lambda x, y: inlet(x), lo=-1.0, hi=0.0),
        EdgeCondition("left", "dirichlet", wall),
        EdgeCondition("top", "dirichlet", wall),
        EdgeCondition("right", "dirichlet", wall),
        EdgeCondition("bottom", "zero-gradient", lo=0.0, hi=1.0),
    ])

    if exact_method == "rk4":
        def exact(x, y):
            return _smith_hutton_rk4(x, y, inlet, wall)
    elif exact_method == "streamfunction":
        def exact(x, y):
            return _smith_hutton_streamfunction(x, y, inlet, wall)
    else:
        raise ValueError(f"unknown exact method {exact_method!r}")

    return ProblemSpec(
        name="smith-hutton",
        grid=grid,
        velocity=VelocityField.from_function(grid, smith_hutton_velocity),
        boundary=bc,
        exact=exact,
        label=f"{nx}x{ny}",
        velocity_fn=smith_hutton_velocity,
        inlet=inlet,
        params={"alpha": params.alpha, "gamma": params.gamma},
    )


def outlet_exact(x, alpha):
    """Outlet profile ``1 + tanh(alpha (1 - 2x))`` implied by the symmetric streamlines."""
    return 1 + np.tanh(alpha * (1 - 2 * np.asarray(x, dtype=float)))


def _on_wall(x, y, tol=1e-12):
    return (np.abs(x + 1) <= tol) | (np.abs(x - 1) <= tol) | (np.abs(y - 1) <= tol)


def trace_to_inlet(x, y, h=1e-3, velocity=smith_hutton_velocity, max_steps=200000):
    """Follow streamlines upstream with arc-length RK4 until they cross ``y = 0``.

    Returns the ``x`` coordinate of the foot on ``y = 0``. Points already on
    ``y = 0`` with ``u = v = 0`` are returned unchanged; points starting on
    ``y = 0`` otherwise leave it before a crossing is recorded.
    """
    px = np.array(x, dtype=float, ndmin=1).ravel().copy()
    py = np.array(y, dtype=float, ndmin=1).ravel().copy()
    foot = np.full(px.shape, np.nan)

    def direction(qx, qy):
        u, v = velocity(qx, qy)
        s = np.hypot(u, v)
        s = np.where(s > 0, s, 1.0)
        return -u / s, -v / s

    def rk4(qx, qy, dt):
        k1 = direction(qx, qy)
        k2 = direction(qx + 0.5 * dt * k1[0], qy + 0.5 * dt * k1[1])
        k3 = direction(qx + 0.5 * dt * k2[0], qy + 0.5 * dt * k2[1])
        k4 = direction(qx + dt * k3[0], qy + dt * k3[1])
        return (qx + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                qy + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))

    u0, v0 = velocity(px, py)
    still = (u0 == 0) & (v0 == 0)
    foot[still & (py == 0)] = px[still & (py == 0)]
    active = np.flatnonzero(~still)
    for _ in range(max_steps):
        if active.size == 0:
            break
        qx, qy = px[active], py[active]
        nx_, ny_ = rk4(qx, qy, h)
        crossed = ny_ < 0
        if crossed.any():
            # bisect the step length so the last RK4 step lands on y = 0
            cx, cy = qx[crossed], qy[crossed]
            lo = np.zeros(cx.shape)
            hi = np.full(cx.shape, h)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                _, my = rk4(cx, cy, mid)
                below = my < 0
                hi = np.where(below, mid, hi)
                lo = np.where(below, lo, mid)
            fx, _ = rk4(cx, cy, 0.5 * (lo + hi))
            foot[active[crossed]] = fx
        px[active], py[active] = nx_, ny_
        active = active[~crossed]
    if active.size:
        raise RuntimeError(f"{active.size} streamlines did not reach the inlet")
    return foot.reshape(np.shape(x))


def _smith_hutton_rk4(x, y, inlet, wall):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.empty(x.shape)
    walls = _on_wall(x, y)
    base = (np.abs(y) <= 1e-12) & (x <= 0)
    out[walls] = wall
    out[base & ~walls] = inlet(x[base & ~walls])
    rest = ~walls & ~base
    if rest.any():
        out[rest] = inlet(trace_to_inlet(x[rest], y[rest]))
    return out


def _smith_hutton_streamfunction(x, y, inlet, wall):
    # streamfunction (1 - x^2)(1 - y^2) is conserved; the foot sits at x_f < 0
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    psi = (1 - x**2) * (1 - y**2)
    foot = -np.sqrt(np.clip(1 - psi, 0.0, None))
    out = inlet(foot)
    out = np.where(_on_wall(x, y), wall, out)
    return out


def make_problem(name: str, nx: int | None = None, ny: int | None = None, **params) -> ProblemSpec:
    """Registry lookup; ``nx``/``ny`` default to the standard sizes."""
    if name in PROFILE_KINDS:
        return make_profile_problem(name, nx or 30, ny or 30, **params)
    if name == "smith-hutton":
        return make_smith_hutton(nx or 40, ny or 20, **params)
    raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}")


PROBLEMS = {
    "step": make_profile_problem,
    "double-step": make_profile_problem,
    "sine": make_profile_problem,
    "smith-hutton": make_smith_hutton,
}


def exact_field(problem: ProblemSpec, grid: Grid | None = None) -> ScalarField:
    grid = grid or problem.grid
    X, Y = grid.meshgrid()
    return ScalarField(grid, problem.exact(X, Y))


@dataclass(frozen=True)
class ErrorMetrics:
    max_abs_diff: float
    overshoot: float
    undershoot: float


def error_metrics(numeric: ScalarField, exact: ScalarField, data_bounds=None) -> ErrorMetrics:
    """Max nodal difference and excursions beyond the boundary data range.

    ``data_bounds`` defaults to the range of the exact field.
    """
    if numeric.grid != exact.grid:
        raise ValueError("fields live on different grids")
    lo, hi = data_bounds if data_bounds is not None else (exact.values.min(), exact.values.max())
    return ErrorMetrics(
        max_abs_diff=float(np.max(np.abs(numeric.values - exact.values))),
        overshoot=float(max(0.0, numeric.values.max() - hi)),
        undershoot=float(max(0.0, lo - numeric.values.min())),
    )


def extract_profile(problem: ProblemSpec, field: ScalarField, y_line: float = 0.8):
    """Values along the comparison line.

    Uniform-flow problems use the grid row nearest ``y_line``; Smith-Hutton
    uses the outlet ``0 <= x <= 1, y = 0``. Returns ``(x, phi, exact, row)``.
    """
    g = problem.grid
    x = g.x
    if problem.name == "smith-hutton":
        row = 0
        keep = x >= -1e-12
    else:
        row = int(round((y_line - g.y_min) / g.dy))
        keep = np.ones(g.nx, dtype=bool)
    y = g.y_min + row * g.dy
    ex = problem.exact(x[keep], np.full(keep.sum(), y))
    return x[keep], field.values[row, keep], ex, row
