"""Points of the closed domain, the region decomposition and the WF distance.

A spatial point ``z = (x, y)`` has ``n`` degenerate coordinates ``x_i >= 0``
and ``m`` tangential coordinates ``y_l``.  The region index of a point is
the set of degenerate directions in which it is "close" to the boundary,
``I(z) = {i : x_i <= 1}`` (indices are 1-based, as in the coefficient
names).

The spatial distance is the explicit representative

    rho0(z0, z) = max_{i in I∩J} |sqrt(x0_i) - sqrt(x_i)|
                + max_{j not in I∩J} |x0_j - x_j|
                + max_l |y0_l - y_l|

with ``I = I(z0)`` and ``J = I(z)``; empty maxima contribute 0.  The
parabolic distance adds ``sqrt(|t0 - t|)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import FrozenSet, Sequence

import numpy as np

__all__ = [
    "SpatialPoint", "Point", "RegionIndex", "DimensionMismatch",
    "classify_region", "rho0", "rho", "all_regions",
    "region_mask", "pair_distance", "region_flags",
]

RegionIndex = FrozenSet[int]


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SpatialPoint:
    x: tuple[float, ...] = ()
    y: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if any(not np.isfinite(v) for v in self.x + self.y):
            raise ValueError("coordinates must be finite")
        if any(v < 0 for v in self.x):
            raise ValueError(f"degenerate coordinates must be nonnegative, got {self.x}")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.y)

    def env(self) -> dict[str, float]:
        """Variable bindings for :func:`kimuralab.exprlang.evaluate`."""
        out = {f"x{i + 1}": v for i, v in enumerate(self.x)}
        out.update({f"y{l + 1}": v for l, v in enumerate(self.y)})
        return out


@dataclass(frozen=True)
class Point:
    t: float = 0.0
    z: SpatialPoint = field(default_factory=SpatialPoint)

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        if not (self.t >= 0):
            raise ValueError(f"time must be nonnegative, got {self.t}")

    def env(self) -> dict[str, float]:
        out = self.z.env()
        out["t"] = self.t
        return out


def classify_region(z: SpatialPoint) -> RegionIndex:
    """Region index ``{i : x_i <= 1}``; interface points ``x_i = 1`` go to I."""
    return frozenset(i + 1 for i, v in enumerate(z.x) if v <= 1.0)


def all_regions(n: int) -> list[RegionIndex]:
    """Every subset of ``{1..n}``, smallest first."""
    idx = range(1, n + 1)
    return [frozenset(c) for k in range(n + 1) for c in combinations(idx, k)]


def _check_dims(z0: SpatialPoint, z: SpatialPoint):
    if z0.n != z.n or z0.m != z.m:
        raise DimensionMismatch(f"(n, m) = ({z0.n}, {z0.m}) vs ({z.n}, {z.m})")


def rho0(z0: SpatialPoint, z: SpatialPoint) -> float:
    _check_dims(z0, z)
    both = classify_region(z0) & classify_region(z)
    near, far = 0.0, 0.0
    for i, (a, b) in enumerate(zip(z0.x, z.x)):
        if i + 1 in both:
            near = max(near, abs(np.sqrt(a) - np.sqrt(b)))
        else:
            far = max(far, abs(a - b))
    tang = max((abs(a - b) for a, b in zip(z0.y, z.y)), default=0.0)
    return float(near + far + tang)


def rho(p0: Point, p: Point) -> float:
    return rho0(p0.z, p.z) + float(np.sqrt(abs(p0.t - p.t)))


# --------------------------------------------------------------------------
# vectorised forms used by the norm code
# --------------------------------------------------------------------------

def region_flags(x: np.ndarray) -> np.ndarray:
    """Boolean array ``x_i <= 1`` for node coordinates of shape (N, n)."""
    return np.asarray(x) <= 1.0


def pair_distance(t0, x0, y0, t1, x1, y1, sx0=None, sx1=None) -> np.ndarray:
    """Vectorised :func:`rho` between broadcastable coordinate arrays.

    ``x*`` have a trailing axis of length n and ``y*`` of length m.  The
    optional ``sx*`` are precomputed square roots of the ``x`` arrays.
    """
    x0 = np.asarray(x0)
    x1 = np.asarray(x1)
    shape = np.broadcast_shapes(np.shape(t0), np.shape(t1))
    out = np.sqrt(np.abs(np.asarray(t0) - np.asarray(t1)))
    out = np.broadcast_to(out, shape).copy()
    n = x0.shape[-1]
    if n:
        if sx0 is None:
            sx0 = np.sqrt(x0)
        if sx1 is None:
            sx1 = np.sqrt(x1)
        both = (x0 <= 1.0) & (x1 <= 1.0)
        dsq = np.abs(sx0 - sx1)
        dlin = np.abs(x0 - x1)
        near = np.where(both, dsq, 0.0).max(axis=-1)
        far = np.where(both, 0.0, dlin).max(axis=-1)
        out += near + far
    y0 = np.asarray(y0)
    if y0.shape[-1]:
        out += np.abs(y0 - np.asarray(y1)).max(axis=-1)
    return out


def region_mask(x: np.ndarray, region: RegionIndex, kind: str = "M") -> np.ndarray:
    """Nodes of shape (N, n) lying in the closure of M_I, M'_I or M''_I.

    ``kind`` is ``"M"`` (x_i in [0,1] for i in I, x_j >= 1 otherwise),
    ``"M'"`` (x_i in [0,1], x_j >= 1/2) or ``"M''"`` (x_i in [0,2],
    x_j >= 1/4).
    """
    hi, lo = {"M": (1.0, 1.0), "M'": (1.0, 0.5), "M''": (2.0, 0.25)}[kind]
    x = np.asarray(x)
    ok = np.ones(x.shape[0], dtype=bool)
    for i in range(x.shape[1]):
        if i + 1 in region:
            ok &= x[:, i] <= hi
        else:
            ok &= x[:, i] >= lo
    return ok


def as_point(t: float, x: Sequence[float] = (), y: Sequence[float] = ()) -> Point:
    return Point(t, SpatialPoint(tuple(x), tuple(y)))
