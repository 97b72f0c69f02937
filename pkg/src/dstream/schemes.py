"""Nodal update rules for steady advection ``u phi_x + v phi_y = 0``.

Three families are provided:

* ``upwind``  first-order donor cell,
* ``dstream`` discrete-streamline triangles of a given range, optionally with
  clamped (limited) weights,
* ``tvd``     flux-limited reconstruction (Min-Mod, QUICK, SUPERBEE) with the
  high-order part lagged as a deferred correction.

Upwind and DStreaM are linear two-point stencils once the velocity is known,
so they are assembled once into a :class:`LinearStencil` and the Gauss-Seidel
sweeps only blend two values per node.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import BoundaryCondition, ScalarField, VelocityField
from .stencil import SectorFan, build_fan, sector_cosines

__all__ = [
    "SchemeConfig",
    "LIMITERS",
    "limiter_psi",
    "tvd_face_value",
    "LinearStencil",
    "assemble_upwind",
    "assemble_dstream",
    "upwind_update",
    "dstream_update",
    "tvd_update",
]

LIMITERS = {"minmod": _kernels.MINMOD, "quick": _kernels.QUICK, "superbee": _kernels.SUPERBEE}
_LIMITER_LABELS = {"minmod": "Min-Mod", "quick": "QUICK(TVD)", "superbee": "SUPERBEE"}


@dataclass(frozen=True)
class SchemeConfig:
    kind: str
    range: int | None = None
    limited: bool | None = None
    limiter: str | None = None

    def __post_init__(self):
        if self.kind == "dstream":
            if self.range is None or not 1 <= self.range <= 5 or self.limited is None:
                raise ValueError("dstream needs a range in 1..5 and a limited flag")
            if self.limiter is not None:
                raise ValueError("dstream takes no TVD limiter")
        elif self.kind == "tvd":
            if self.limiter not in LIMITERS:
                raise ValueError(f"unknown limiter {self.limiter!r}; choose from {sorted(LIMITERS)}")
            if self.range is not None or self.limited is not None:
                raise ValueError("range/limited only apply to dstream")
        elif self.kind == "upwind":
            if self.range is not None or self.limited is not None or self.limiter is not None:
                raise ValueError("upwind takes no options")
        else:
            raise ValueError(f"unknown scheme kind {self.kind!r}")

    @classmethod
    def upwind(cls):
        return cls("upwind")

    @classmethod
    def dstream(cls, range_: int, limited: bool = False):
        return cls("dstream", range=range_, limited=limited)

    @classmethod
    def tvd(cls, limiter: str):
        return cls("tvd", limiter=limiter)

    @property
    def label(self) -> str:
        if self.kind == "upwind":
            return "Upwind"
        if self.kind == "tvd":
            return _LIMITER_LABELS[self.limiter]
        return f"DStreaM R{self.range}" + (" limited" if self.limited else "")

    @property
    def key(self) -> str:
        """Short name used on the command line and in file names."""
        if self.kind == "upwind":
            return "upwind"
        if self.kind == "tvd":
            return self.limiter
        return f"dstream-r{self.range}" + ("-limited" if self.limited else "")


# ---------------------------------------------------------------- limiters

def limiter_psi(r, limiter: str):
    """Vectorised limiter function ``psi(r)``."""
    r = np.asarray(r, dtype=float)
    if limiter == "minmod":
        return np.maximum(0.0, np.minimum(r, 1.0))
    if limiter == "quick":
        return np.maximum(0.0, np.minimum(np.minimum(2 * r, (3 + r) / 4), 2.0))
    if limiter == "superbee":
        return np.maximum(0.0, np.maximum(np.minimum(2 * r, 1.0), np.minimum(r, 2.0)))
    raise ValueError(f"unknown limiter {limiter!r}")


def tvd_face_value(phi_uu: float, phi_u: float, phi_d: float, limiter: str) -> float:
    """Face value ``phi_U + psi(r)/2 * (phi_D - phi_U)``, ``r = (phi_U - phi_UU)/(phi_D - phi_U)``."""
    return phi_u + 0.5 * _kernels.limited_difference(phi_u - phi_uu, phi_d - phi_u, LIMITERS[limiter])


# ---------------------------------------------------------- linear stencils

@dataclass
class LinearStencil:
    """Per-node two-point update ``phi0 = blend(src1, src2, w2)``.

    A source is a node (``idx >= 0``) or a fixed boundary value (``fix``).
    ``frozen`` nodes keep their current value; ``clip`` bounds the blend to
    the two source values. ``range_used`` and ``sector`` are diagnostics
    (-1 where not applicable).
    """

    idx1: np.ndarray
    idx2: np.ndarray
    fix1: np.ndarray
    fix2: np.ndarray
    w2: np.ndarray
    clip: np.ndarray
    frozen: np.ndarray
    range_used: np.ndarray
    sector: np.ndarray

    @classmethod
    def empty(cls, size: int) -> "LinearStencil":
        return cls(
            idx1=np.zeros(size, dtype=np.int64),
            idx2=np.zeros(size, dtype=np.int64),
            fix1=np.zeros(size),
            fix2=np.zeros(size),
            w2=np.zeros(size),
            clip=np.zeros(size, dtype=np.bool_),
            frozen=np.ones(size, dtype=np.bool_),
            range_used=np.full(size, -1, dtype=np.int64),
            sector=np.full(size, -1, dtype=np.int64),
        )

    def value(self, phi_flat: np.ndarray, k: int) -> float:
        if self.frozen[k]:
            return float(phi_flat[k])
        return float(_kernels.linear_value(phi_flat, k, self.idx1, self.idx2, self.fix1,
                                           self.fix2, self.w2, self.clip))


def _swept_nodes(bc: BoundaryCondition | None, grid, nodes=None) -> np.ndarray:
    if nodes is not None:
        return np.asarray(nodes, dtype=np.int64)
    if bc is None:
        return np.arange(grid.size, dtype=np.int64)
    return np.flatnonzero(bc.swept.ravel())


def assemble_upwind(velocity: VelocityField, bc: BoundaryCondition | None = None,
                    nodes=None) -> LinearStencil:
    """Donor-cell weights ``|u| dy`` and ``|v| dx`` on the two upwind neighbours."""
    g = velocity.grid
    st = LinearStencil.empty(g.size)
    k = _swept_nodes(bc, g, nodes)
    i, j = k % g.nx, k // g.nx
    u = velocity.u.ravel()[k]
    v = velocity.v.ravel()[k]
    ix = i - np.sign(u).astype(np.int64)
    jy = j - np.sign(v).astype(np.int64)
    ax = np.where((u != 0) & (ix >= 0) & (ix < g.nx), np.abs(u) * g.dy, 0.0)
    ay = np.where((v != 0) & (jy >= 0) & (jy < g.ny), np.abs(v) * g.dx, 0.0)
    a0 = ax + ay
    live = a0 > 0
    kx = j * g.nx + np.clip(ix, 0, g.nx - 1)
    ky = np.clip(jy, 0, g.ny - 1) * g.nx + i
    kx = np.where(ax > 0, kx, ky)
    ky = np.where(ay > 0, ky, kx)
    st.idx1[k] = kx
    st.idx2[k] = ky
    with np.errstate(invalid="ignore", divide="ignore"):
        st.w2[k] = np.where(live, ay / np.where(live, a0, 1.0), 0.0)
    st.frozen[k] = ~live
    return st


def _ray_sources(grid, velocity, bc, I, J, d):
    """Upstream source along lattice direction ``d`` for nodes ``(I, J)``.

    Returns ``(valid, idx, fix, px, py, us, vs)``: node index or fixed boundary
    value, the source offset in lattice units and its velocity. A neighbour
    outside the grid is replaced by the point where the ray leaves the domain,
    provided that point carries Dirichlet data.
    """
    di, dj = d
    ti, tj = I + di, J + dj
    inside = (ti >= 0) & (ti < grid.nx) & (tj >= 0) & (tj < grid.ny)
    idx = np.where(inside, tj * grid.nx + ti, -1)
    fix = np.zeros(I.shape)
    px = np.full(I.shape, float(di))
    py = np.full(I.shape, float(dj))
    us = np.zeros(I.shape)
    vs = np.zeros(I.shape)
    uf, vf = velocity.u.ravel(), velocity.v.ravel()
    us[inside] = uf[idx[inside]]
    vs[inside] = vf[idx[inside]]
    valid = inside.copy()
    out = ~inside
    if out.any() and bc is not None:
        Io, Jo = I[out].astype(float), J[out].astype(float)
        with np.errstate(divide="ignore"):
            tx = np.full(Io.shape, np.inf) if di == 0 else ((0.0 if di < 0 else grid.nx - 1) - Io) / di
            ty = np.full(Jo.shape, np.inf) if dj == 0 else ((0.0 if dj < 0 else grid.ny - 1) - Jo) / dj
        t = np.minimum(tx, ty)
        bx, by = Io + t * di, Jo + t * dj
        # snap the exit coordinate exactly onto the boundary line it crosses
        bx = np.where(tx <= ty, 0.0 if di < 0 else grid.nx - 1.0, bx)
        by = np.where(ty <= tx, 0.0 if dj < 0 else grid.ny - 1.0, by)
        xb = grid.x_min + bx * grid.dx
        yb = grid.y_min + by * grid.dy
        data = bc.edge_value(xb, yb)
        ok = (t > 0) & np.isfinite(data)
        fix[out] = np.where(ok, data, 0.0)
        px[out] = t * di
        py[out] = t * dj
        us_o, vs_o = velocity.sample(xb, yb)
        us[out] = us_o
        vs[out] = vs_o
        valid[out] = ok
    return valid, idx, fix, px, py, us, vs


def _select_and_weigh(velocity, bc, fan: SectorFan, k, limited):
    """Choose a sector per node and compute its weights.

    Returns a dict of per-node arrays plus a ``status`` code:
    0 ok, 1 no geometrically usable sector, 2 stagnant, 3 zero weight sum.
    """
    g = velocity.grid
    I, J = k % g.nx, k // g.nx
    dirs = fan.directions
    n = len(dirs)
    srcs = [_ray_sources(g, velocity, bc, I, J, d) for d in dirs]
    valid = np.array([s[0] for s in srcs])
    us = np.array([s[5] for s in srcs])
    vs = np.array([s[6] for s in srcs])
    nxt = (np.arange(n) + 1) % n
    u0 = velocity.u.ravel()[k]
    v0 = velocity.v.ravel()[k]
    ua = (2 * u0 + us + us[nxt]) / 4
    va = (2 * v0 + vs + vs[nxt]) / 4
    _, _, medians = fan.as_arrays()
    cos = sector_cosines(medians, ua, va)
    usable = valid & valid[nxt]
    candidate = usable & ~np.isnan(cos)
    choice = np.argmin(np.where(candidate, cos, np.inf), axis=0)
    cols = np.arange(k.size)

    status = np.zeros(k.size, dtype=np.int64)
    status[~candidate.any(axis=0)] = 2
    status[~usable.any(axis=0)] = 1

    stacked = {name: np.array([s[pos] for s in srcs]).reshape(n, k.size)
               for pos, name in ((1, "idx"), (2, "fix"), (3, "px"), (4, "py"))}
    out = {"sector": choice}
    for tag, row in (("1", choice), ("2", nxt[choice])):
        for name, arr in stacked.items():
            out[name + tag] = arr[row, cols]
    U = ua[choice, cols]
    V = va[choice, cols]
    # apex at the origin of lattice coordinates
    a1 = V * out["px2"] - U * out["py2"]
    a2 = U * out["py1"] - V * out["px1"]
    if limited:
        a1 = np.maximum(0.0, a1)
        a2 = np.maximum(0.0, a2)
    a0 = a1 + a2
    status[(status == 0) & (a0 == 0)] = 3
    with np.errstate(invalid="ignore", divide="ignore"):
        out["w2"] = np.where(status == 0, a2 / np.where(a0 == 0, 1.0, a0), 0.0)
    out["status"] = status
    return out


_CHUNK = 4096


def _select_and_weigh_chunked(velocity, bc, fan, k, limited):
    # bounds the (n_sectors, n_nodes) temporaries on fine grids
    if k.size <= _CHUNK:
        return _select_and_weigh(velocity, bc, fan, k, limited)
    parts = [_select_and_weigh(velocity, bc, fan, k[s:s + _CHUNK], limited) for s in range(0, k.size, _CHUNK)]
    return {name: np.concatenate([p[name] for p in parts]) for name in parts[0]}


def assemble_dstream(velocity: VelocityField, bc: BoundaryCondition | None, fan: SectorFan,
                     limited: bool, nodes=None) -> LinearStencil:
    """Discrete-streamline stencil for every swept node.

    Nodes without a usable sector at the requested range retry at the next
    lower range. A zero weight sum falls back to the range-1 fan; nodes that
    are stagnant or still degenerate keep their value.
    """
    g = velocity.grid
    st = LinearStencil.empty(g.size)
    pending = _swept_nodes(bc, g, nodes)
    r = fan.range
    zero_sum = np.zeros(0, dtype=np.int64)
    while pending.size:
        res = _select_and_weigh_chunked(velocity, bc, build_fan(r) if r != fan.range else fan, pending, limited)
        ok = res["status"] == 0
        kk = pending[ok]
        for name in ("idx1", "idx2", "fix1", "fix2", "w2", "sector"):
            getattr(st, name)[kk] = res[name][ok]
        st.frozen[kk] = False
        st.clip[kk] = limited
        st.range_used[kk] = r
        zero_sum = np.concatenate([zero_sum, pending[res["status"] == 3]])
        if r == 1:
            break
        pending = pending[res["status"] == 1]
        r -= 1
    zero_sum = zero_sum[st.range_used[zero_sum] == -1] if zero_sum.size else zero_sum
    if zero_sum.size and fan.range > 1:
        res = _select_and_weigh_chunked(velocity, bc, build_fan(1), zero_sum, limited)
        ok = res["status"] == 0
        kk = zero_sum[ok]
        for name in ("idx1", "idx2", "fix1", "fix2", "w2", "sector"):
            getattr(st, name)[kk] = res[name][ok]
        st.frozen[kk] = False
        st.clip[kk] = limited
        st.range_used[kk] = 1
    return st


# ------------------------------------------------------ single-node updates

def upwind_update(node, phi: ScalarField, velocity: VelocityField) -> float:
    i, j = node
    g = phi.grid
    k = j * g.nx + i
    st = assemble_upwind(velocity, nodes=[k])
    return st.value(phi.values.ravel(), k)


def dstream_update(node, phi: ScalarField, velocity: VelocityField, fan: SectorFan,
                   limited: bool, bc: BoundaryCondition | None = None) -> float:
    """DStreaM value of one node given the current field.

    Without ``bc`` only in-grid neighbours are usable; with it, rays leaving
    the domain through a Dirichlet segment take the boundary data there.
    """
    i, j = node
    g = phi.grid
    k = j * g.nx + i
    st = assemble_dstream(velocity, bc, fan, limited, nodes=[k])
    return st.value(phi.values.ravel(), k)


def tvd_update(node, phi: ScalarField, velocity: VelocityField, limiter: str) -> float:
    i, j = node
    g = phi.grid
    k = j * g.nx + i
    return float(_kernels.tvd_value(phi.values.ravel(), k, g.nx, g.ny, velocity.u.ravel(),
                                    velocity.v.ravel(), g.dx, g.dy, LIMITERS[limiter]))
