"""Gauss-Seidel iteration with corner-dependent sweep order and under-relaxation."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import ZERO_GRADIENT, BoundaryCondition, ScalarField, VelocityField, apply_boundary
from .schemes import LIMITERS, SchemeConfig, assemble_dstream, assemble_upwind
from .stencil import build_fan

__all__ = [
    "CORNERS",
    "ROTATION",
    "SweepPolicy",
    "SolveConfig",
    "SolveReport",
    "Divergence",
    "Discretization",
    "sweep",
    "solve",
    "write_residuals_csv",
]

CORNERS = (("min", "min"), ("max", "min"), ("min", "max"), ("max", "max"))
# corners taken in index order: (1,1), (N,1), (1,M), (N,M)
ROTATION = CORNERS


class Divergence(ArithmeticError):
    def __init__(self, node, iteration=None):
        self.node = node
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(f"non-finite value at node (i={node[0]}, j={node[1]}){where}")


@dataclass(frozen=True)
class SweepPolicy:
    kind: str = "rotating"
    corners: tuple = ROTATION

    def __post_init__(self):
        if self.kind not in ("fixed", "rotating"):
            raise ValueError(f"unknown sweep policy {self.kind!r}")
        if self.kind == "rotating" and sorted(self.corners) != sorted(CORNERS):
            raise ValueError("rotating corner order must be a permutation of the four corners")
        if self.kind == "fixed" and len(self.corners) < 1:
            raise ValueError("fixed policy needs a corner")

    @classmethod
    def fixed(cls, corner=("min", "min")):
        return cls("fixed", (tuple(corner),))

    @classmethod
    def rotating(cls, corners=ROTATION):
        return cls("rotating", tuple(tuple(c) for c in corners))

    @classmethod
    def default_for(cls, scheme: SchemeConfig) -> "SweepPolicy":
        return cls.fixed() if scheme.kind == "tvd" else cls.rotating()

    def corner(self, iteration: int):
        """Start corner of the zero-based ``iteration``."""
        if self.kind == "fixed":
            return self.corners[0]
        return self.corners[iteration % 4]


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float = 1e-8
    alpha: float = 1.0
    max_iter: int = 50000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("under-relaxation must lie in (0, 1]")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    residual_history: list = field(default_factory=list)
    wall_time: float = 0.0
    converged: bool = False


def _order(grid, swept: np.ndarray, corner) -> np.ndarray:
    ci, cj = corner
    irange = np.arange(grid.nx) if ci == "min" else np.arange(grid.nx)[::-1]
    jrange = np.arange(grid.ny) if cj == "min" else np.arange(grid.ny)[::-1]
    flat = (jrange[:, None] * grid.nx + irange[None, :]).ravel()
    return flat[swept.ravel()[flat]].astype(np.int64)


class Discretization:
    """A scheme bound to a velocity field and boundary tagging, ready to sweep."""

    def __init__(self, velocity: VelocityField, bc: BoundaryCondition, scheme: SchemeConfig):
        self.grid = velocity.grid
        self.velocity = velocity
        self.bc = bc
        self.scheme = scheme
        self.stencil = None
        if scheme.kind == "upwind":
            self.stencil = assemble_upwind(velocity, bc)
        elif scheme.kind == "dstream":
            self.stencil = assemble_dstream(velocity, bc, build_fan(scheme.range), scheme.limited)
        self._u = np.ascontiguousarray(velocity.u.ravel())
        self._v = np.ascontiguousarray(velocity.v.ravel())
        self._orders = {c: _order(self.grid, bc.swept, c) for c in CORNERS}
        zg = (bc.kind == ZERO_GRADIENT).ravel()
        self._zg = np.flatnonzero(zg)
        self._zg_src = bc.source.ravel()[zg]

    def sweep(self, phi_flat: np.ndarray, corner, alpha: float = 1.0) -> float:
        """One in-place sweep from ``corner``; returns the pre-relaxation residual."""
        order = self._orders[tuple(corner)]
        if self.stencil is not None:
            st = self.stencil
            res, bad = _kernels.linear_sweep(phi_flat, order, st.idx1, st.idx2, st.fix1, st.fix2,
                                             st.w2, st.clip, st.frozen, float(alpha))
        else:
            g = self.grid
            res, bad = _kernels.tvd_sweep(phi_flat, order, g.nx, g.ny, self._u, self._v,
                                          g.dx, g.dy, LIMITERS[self.scheme.limiter], float(alpha))
        if bad >= 0:
            raise Divergence((int(bad % self.grid.nx), int(bad // self.grid.nx)))
        if self._zg.size:
            phi_flat[self._zg] = phi_flat[self._zg_src]
        return float(res)


def sweep(phi: ScalarField, velocity: VelocityField, scheme: SchemeConfig, start_corner,
          bc: BoundaryCondition, alpha: float = 1.0) -> float:
    """Sweep ``phi`` in place once and return the largest unrelaxed change.

    Every scheme-computed node is visited once, ``i`` fastest, starting at
    ``start_corner``. Zero-gradient nodes are refreshed afterwards.
    """
    disc = Discretization(velocity, bc, scheme)
    flat = phi.values.reshape(-1)
    res = disc.sweep(flat, start_corner, alpha)
    phi.values = flat.reshape(phi.grid.shape)
    return res


def solve(problem, scheme: SchemeConfig, policy: SweepPolicy | None = None,
          cfg: SolveConfig | None = None, initial: ScalarField | None = None):
    """Iterate sweeps until the residual drops to ``cfg.epsilon`` or ``cfg.max_iter``.

    ``problem`` needs ``grid``, ``velocity`` and ``boundary`` attributes. The
    initial guess defaults to zero with boundary data imposed.
    """
    policy = policy or SweepPolicy.default_for(scheme)
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    disc = Discretization(problem.velocity, problem.boundary, scheme)
    start = initial if initial is not None else ScalarField.zeros(problem.grid)
    phi = apply_boundary(start, problem.boundary).values.reshape(-1).copy()

    history = []
    converged = False
    for it in range(cfg.max_iter):
        try:
            res = disc.sweep(phi, policy.corner(it), cfg.alpha)
        except Divergence as exc:
            raise Divergence(exc.node, it + 1) from None
        history.append(res)
        if res <= cfg.epsilon:
            converged = True
            break
    report = SolveReport(
        iterations=len(history),
        final_residual=history[-1],
        residual_history=history,
        wall_time=time.perf_counter() - t0,
        converged=converged,
    )
    return ScalarField(problem.grid, phi.reshape(problem.grid.shape)), report


def write_residuals_csv(report: SolveReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "residual"])
        for n, r in enumerate(report.residual_history, start=1):
            writer.writerow([n, f"{r:.17g}"])
