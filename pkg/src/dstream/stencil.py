"""Discrete-streamline triangles around a node.

A *fan* of range ``r`` splits the plane around a node into ``8 * 2**(r-1)``
triangular sectors. Each sector has the node itself as apex and two lattice
neighbours ``n1``, ``n2`` (counterclockwise order) as its base. The update
for the apex is the plane through the three vertices, integrated against the
sector-averaged velocity, which collapses to a two-point weighting of the
base values.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Sector",
    "SectorFan",
    "ShapeCoefficients",
    "StencilWeights",
    "StagnantNode",
    "DegenerateTriangle",
    "ZeroWeightSum",
    "MAX_RANGE",
    "build_fan",
    "sector_containing",
    "sector_cosines",
    "select_sector",
    "shape_coefficients",
    "average_velocity",
    "stencil_weights",
    "write_fan_csv",
]

MAX_RANGE = 5


class StagnantNode(Exception):
    """Every candidate sector has a zero average velocity."""


class DegenerateTriangle(ValueError):
    """The three shape-function nodes are collinear."""


class ZeroWeightSum(ArithmeticError):
    """The stencil weights sum to zero, so the update is undefined."""


@dataclass(frozen=True)
class Sector:
    index: int
    n1: tuple[int, int]
    n2: tuple[int, int]

    @property
    def median(self) -> tuple[float, float]:
        return (0.5 * (self.n1[0] + self.n2[0]), 0.5 * (self.n1[1] + self.n2[1]))


@dataclass(frozen=True)
class SectorFan:
    range: int
    sectors: tuple[Sector, ...]

    def __len__(self):
        return len(self.sectors)

    @property
    def directions(self) -> list[tuple[int, int]]:
        return [s.n1 for s in self.sectors]

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(n1, n2, median)`` stacked as ``(n_sectors, 2)`` arrays."""
        n1 = np.array([s.n1 for s in self.sectors], dtype=float)
        n2 = np.array([s.n2 for s in self.sectors], dtype=float)
        return n1, n2, 0.5 * (n1 + n2)


def _angle(d) -> float:
    a = math.atan2(d[1], d[0])
    return a + 2 * math.pi if a < 0 else a


def _split(a, b, r):
    """Direction inserted between angular neighbours ``a`` and ``b``."""
    mediant = (a[0] + b[0], a[1] + b[1])
    if max(abs(mediant[0]), abs(mediant[1])) <= r:
        return mediant
    # substitute: the in-window offset nearest the bisector, strictly inside
    lo, hi = _angle(a), _angle(b)
    if hi <= lo:
        hi += 2 * math.pi
    bisector = 0.5 * (lo + hi)
    best = None
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            if (di, dj) == (0, 0) or math.gcd(di, dj) != 1:
                continue
            t = _angle((di, dj))
            if t <= lo:
                t += 2 * math.pi
            if not lo < t < hi:
                continue
            key = (abs(t - bisector), max(abs(di), abs(dj)), abs(dj))
            if best is None or key < best[0]:
                best = (key, (di, dj))
    # between Farey neighbours any fraction has at least the mediant's
    # denominator, so no substitute exists and the mediant leaves the window
    return mediant if best is None else best[1]


@lru_cache(maxsize=None)
def build_fan(range_: int) -> SectorFan:
    """Fan of ``8 * 2**(range_-1)`` sectors, enumerated counterclockwise from +x."""
    if int(range_) != range_ or not 1 <= range_ <= MAX_RANGE:
        raise ValueError(f"range must be an integer in [1, {MAX_RANGE}], got {range_!r}")
    quadrant = [(1, 0), (1, 1), (0, 1)]
    for r in range(2, range_ + 1):
        refined = [quadrant[0]]
        for a, b in zip(quadrant, quadrant[1:]):
            refined += [_split(a, b, r), b]
        quadrant = refined
    dirs = []
    q = quadrant[:-1]
    for _ in range(4):
        dirs += q
        q = [(-dj, di) for di, dj in q]
    sectors = tuple(Sector(k, dirs[k], dirs[(k + 1) % len(dirs)]) for k in range(len(dirs)))
    return SectorFan(range_, sectors)


def sector_containing(fan: SectorFan, direction) -> Sector:
    """Sector whose half-open cone ``[n1, n2)`` contains ``direction``."""
    t = _angle(direction)
    for s in fan.sectors:
        lo = _angle(s.n1)
        width = (_angle(s.n2) - lo) % (2 * math.pi)
        if (t - lo) % (2 * math.pi) < width:
            return s
    raise AssertionError("fan does not cover the full angle")


def sector_cosines(medians: np.ndarray, u, v) -> np.ndarray:
    """Cosine between each sector median and its average velocity.

    ``medians`` has shape ``(n_sectors, 2)``; ``u`` and ``v`` broadcast against
    ``(n_sectors, ...)``. Zero velocities give NaN.
    """
    mx = medians[:, 0].reshape((-1,) + (1,) * (np.ndim(u) - 1))
    my = medians[:, 1].reshape(mx.shape)
    speed = np.hypot(u, v)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (u * mx + v * my) / (speed * np.hypot(mx, my))
    return np.where(speed > 0, cos, np.nan)


def select_sector(fan: SectorFan, averages: Sequence | Callable) -> Sector:
    """Pick the sector whose median is most anti-parallel to its own average velocity.

    ``averages`` is either an ``(n_sectors, 2)`` array-like or a callable
    ``averages(sector) -> (u, v)``. Ties go to the first sector counterclockwise.
    """
    if callable(averages):
        vel = np.array([averages(s) for s in fan.sectors], dtype=float)
    else:
        vel = np.asarray(averages, dtype=float)
    _, _, medians = fan.as_arrays()
    cos = sector_cosines(medians, vel[:, 0], vel[:, 1])
    if np.all(np.isnan(cos)):
        raise StagnantNode("zero average velocity in every sector")
    return fan.sectors[int(np.nanargmin(cos))]


@dataclass(frozen=True)
class ShapeCoefficients:
    c0: float
    c1: float
    c2: float

    def __call__(self, x, y):
        return self.c0 + self.c1 * x + self.c2 * y


def shape_coefficients(p0, p1, p2, phi0, phi1, phi2) -> ShapeCoefficients:
    """Plane ``c0 + c1*x + c2*y`` through three nodal values."""
    (x0, y0), (x1, y1), (x2, y2) = p0, p1, p2
    den = x0 * (y2 - y1) + x1 * (y0 - y2) + x2 * (y1 - y0)
    scale = max(abs(x1 - x0), abs(y1 - y0), abs(x2 - x0), abs(y2 - y0)) ** 2
    if scale == 0 or abs(den) <= 1e-13 * scale:
        raise DegenerateTriangle(f"collinear nodes {p0}, {p1}, {p2}")
    c0 = (phi0 * (x2 * y1 - x1 * y2) + phi1 * (x0 * y2 - x2 * y0) + phi2 * (x1 * y0 - x0 * y1)) / den
    c1 = (phi0 * (y2 - y1) + phi1 * (y0 - y2) + phi2 * (y1 - y0)) / den
    c2 = -(phi0 * (x2 - x1) + phi1 * (x0 - x2) + phi2 * (x1 - x0)) / den
    return ShapeCoefficients(c0, c1, c2)


def average_velocity(v0, v1, v2):
    """Sector velocity, weighting the apex twice: ``(2*v0 + v1 + v2) / 4``."""
    return (2 * np.asarray(v0, dtype=float) + np.asarray(v1, dtype=float) + np.asarray(v2, dtype=float)) / 4


@dataclass(frozen=True)
class StencilWeights:
    a0: float
    a1: float
    a2: float
    limited: bool

    def apply(self, phi1: float, phi2: float) -> float:
        return _blend(phi1, phi2, self.a2 / self.a0)


def _raw_weights(p0, p1, p2, u, v):
    a1 = u * (p0[1] - p2[1]) - v * (p0[0] - p2[0])
    a2 = v * (p0[0] - p1[0]) - u * (p0[1] - p1[1])
    return a1, a2


def stencil_weights(p0, p1, p2, velocity, limited: bool = False) -> StencilWeights:
    """Weights of the two base nodes in ``phi0 = (a1*phi1 + a2*phi2) / a0``.

    With ``limited`` each weight is clamped at zero, which makes the update a
    convex combination of ``phi1`` and ``phi2``.
    """
    u, v = velocity
    a1, a2 = _raw_weights(p0, p1, p2, u, v)
    if limited:
        a1, a2 = max(0.0, a1), max(0.0, a2)
    a0 = a1 + a2
    if a0 == 0:
        raise ZeroWeightSum(f"weights sum to zero for velocity {velocity}")
    return StencilWeights(a0, a1, a2, limited)


def _blend(phi1, phi2, w2):
    # pivot on the heavier node so w2 in {0, 1} reproduces a nodal value exactly
    if w2 <= 0.5:
        return phi1 + w2 * (phi2 - phi1)
    return phi2 + (1.0 - w2) * (phi1 - phi2)


def write_fan_csv(fan: SectorFan, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sector", "n1_di", "n1_dj", "n2_di", "n2_dj", "median_x", "median_y"])
        for s in fan.sectors:
            mx, my = s.median
            writer.writerow([s.index, *s.n1, *s.n2, mx, my])
