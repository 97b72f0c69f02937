"""Compiled node kernels and Gauss-Seidel sweeps.

Fields are passed flattened (``k = j*nx + i``) and updated in place, so a
node always sees the freshest value of every neighbour already visited in
the current sweep.
"""
import numpy as np
from numba import njit

MINMOD = 0
QUICK = 1
SUPERBEE = 2


@njit(cache=True)
def psi(r, code):
    if code == MINMOD:
        return max(0.0, min(r, 1.0))
    if code == QUICK:
        return max(0.0, min(2.0 * r, (3.0 + r) / 4.0, 2.0))
    return max(0.0, min(2.0 * r, 1.0), min(r, 2.0))


@njit(cache=True)
def limited_difference(upwind_diff, downwind_diff, code):
    """``psi(r) * downwind_diff`` with ``r = upwind_diff / downwind_diff``; 0 when undefined."""
    if downwind_diff == 0.0:
        return 0.0
    return psi(upwind_diff / downwind_diff, code) * downwind_diff


@njit(cache=True)
def linear_value(phi, k, idx1, idx2, fix1, fix2, w2, clip):
    a = phi[idx1[k]] if idx1[k] >= 0 else fix1[k]
    b = phi[idx2[k]] if idx2[k] >= 0 else fix2[k]
    w = w2[k]
    if w <= 0.5:
        val = a + w * (b - a)
    else:
        val = b + (1.0 - w) * (a - b)
    if clip[k]:
        lo = min(a, b)
        hi = max(a, b)
        val = min(max(val, lo), hi)
    return val


@njit(cache=True)
def linear_sweep(phi, order, idx1, idx2, fix1, fix2, w2, clip, frozen, alpha):
    """One in-place sweep of a two-point stencil; returns (residual, bad node or -1)."""
    res = 0.0
    for n in range(order.size):
        k = order[n]
        if frozen[k]:
            continue
        old = phi[k]
        new = linear_value(phi, k, idx1, idx2, fix1, fix2, w2, clip)
        if not np.isfinite(new):
            return res, k
        d = abs(new - old)
        if d > res:
            res = d
        if alpha == 1.0:
            phi[k] = new
        else:
            phi[k] = old + alpha * (new - old)
    return res, -1


@njit(cache=True)
def _axis_part(phi, k, step, pos, n, code):
    """Upwind value and anti-diffusive correction along one axis.

    ``step`` is the flat offset towards the upwind neighbour and ``pos`` the
    node's position along the axis, counted so that ``pos - 1`` is upwind.
    """
    pU = phi[k + step]
    pP = phi[k]
    corr = 0.0
    if pos + 1 < n:
        corr += 0.5 * limited_difference(pP - pU, phi[k - step] - pP, code)
    if pos - 2 >= 0:
        corr -= 0.5 * limited_difference(pU - phi[k + 2 * step], pP - pU, code)
    return pU, corr


@njit(cache=True)
def tvd_value(phi, k, nx, ny, u, v, dx, dy, code):
    """Deferred-correction TVD value of node ``k`` for ``u phi_x + v phi_y = 0``."""
    i = k % nx
    j = k // nx
    ax = abs(u[k]) * dy
    ay = abs(v[k]) * dx
    num = 0.0
    if ax > 0.0:
        if u[k] > 0.0:
            ok = i >= 1
            step, pos = -1, i
        else:
            ok = i + 1 < nx
            step, pos = 1, nx - 1 - i
        if ok:
            pU, corr = _axis_part(phi, k, step, pos, nx, code)
            num += ax * (pU - corr)
        else:
            ax = 0.0
    if ay > 0.0:
        if v[k] > 0.0:
            ok = j >= 1
            step, pos = -nx, j
        else:
            ok = j + 1 < ny
            step, pos = nx, ny - 1 - j
        if ok:
            pU, corr = _axis_part(phi, k, step, pos, ny, code)
            num += ay * (pU - corr)
        else:
            ay = 0.0
    if ax + ay == 0.0:
        return phi[k]
    return num / (ax + ay)


@njit(cache=True)
def tvd_sweep(phi, order, nx, ny, u, v, dx, dy, code, alpha):
    res = 0.0
    for n in range(order.size):
        k = order[n]
        old = phi[k]
        new = tvd_value(phi, k, nx, ny, u, v, dx, dy, code)
        if not np.isfinite(new):
            return res, k
        d = abs(new - old)
        if d > res:
            res = d
        if alpha == 1.0:
            phi[k] = new
        else:
            phi[k] = old + alpha * (new - old)
    return res, -1
