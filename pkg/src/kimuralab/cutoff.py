"""Smooth cut-off sequences and partitions of unity.

The one-dimensional step is the classical mollifier

    phi(s) = 0 for s <= 0,   1 / (1 + exp(1/s - 1/(1 - s))) on (0, 1),   1 for s >= 1.

It is built as an expression so that every derivative is exact; outside
``(S_LO, S_HI)`` it is replaced by its limiting constant (the error there
is below ``exp(-490)``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import exprlang as el
from .exprlang import Expr, Num, Var
from .geometry import Point, RegionIndex, SpatialPoint, region_mask
from .holder import SampledField, _multi_indices
from .pairs import UNIFORM, check_alpha

__all__ = [
    "step", "step_derivative", "CutoffSequence", "build_cutoff_sequence",
    "cutoff_growth", "Partition", "PartitionMember", "build_partition",
]

S_LO, S_HI = 0.002, 0.998


def _step_of(s: Expr) -> Expr:
    return el.div(Num(1.0), el.add(Num(1.0), el.func("exp", el.sub(el.div(Num(1.0), s),
                                                                     el.div(Num(1.0), el.sub(Num(1.0), s))))))


@lru_cache(maxsize=None)
def _step_derivative_expr(order: int) -> Expr:
    e = _step_of(Var("x1"))
    for _ in range(order):
        e = el.differentiate(e, "x1")
    return e


def step_derivative(s, order: int = 0) -> np.ndarray:
    """``phi^{(order)}(s)`` evaluated elementwise."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    if order == 0:
        out[s >= S_HI] = 1.0
    mid = (s > S_LO) & (s < S_HI)
    if mid.any():
        out[mid] = el.evaluate(_step_derivative_expr(order), {"x1": s[mid]})
    return out


def step(s) -> np.ndarray:
    return step_derivative(s, 0)


class _Radial:
    """``phi((R - |z - z0|) / w)`` with exact derivatives in ``z``."""

    def __init__(self, center, R: float, w: float):
        self.center = np.asarray(center, dtype=float)
        self.R, self.w = float(R), float(w)
        d = len(self.center)
        self.names = [f"x{i + 1}" for i in range(d)]
        dist = el.func("sqrt", _sum([el.power(el.sub(Var(nm), Num(c)), 2)
                                     for nm, c in zip(self.names, self.center)]))
        self.s_expr = el.div(el.sub(Num(self.R), dist), Num(self.w))
        self._cache = {(0,) * d: _step_of(self.s_expr)}

    def _expr(self, zeta) -> Expr:
        zeta = tuple(zeta)
        if zeta not in self._cache:
            # differentiate from a cached lower-order parent
            k = max(i for i, z in enumerate(zeta) if z)
            parent = list(zeta)
            parent[k] -= 1
            self._cache[zeta] = el.differentiate(self._expr(parent), self.names[k])
        return self._cache[zeta]

    def s(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (self.R - np.sqrt(((X - self.center) ** 2).sum(axis=-1))) / self.w

    def __call__(self, X, zeta=None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d = len(self.center)
        zeta = (0,) * d if zeta is None else tuple(zeta)
        s = self.s(X)
        out = np.zeros(s.shape)
        if not any(zeta):
            out[s >= S_HI] = 1.0
        mid = (s > S_LO) & (s < S_HI)
        if mid.any():
            env = {nm: X[..., i][mid] for i, nm in enumerate(self.names)}
            out[mid] = el.evaluate(self._expr(zeta), env)
        return out


def _sum(terms):
    out = Num(0.0)
    for t in terms:
        out = el.add(out, t)
    return out


# --------------------------------------------------------------------------
# the cut-off sequence
# --------------------------------------------------------------------------

@dataclass
class CutoffSequence:
    """``phi_N(t, z) = psi_N(t) eta_N(z)`` with plateau ``Q_N`` and support ``Q_{N+1}``."""

    z0: SpatialPoint
    r: float
    T0: float
    T: float
    N_max: int
    k: int = 0
    _eta: dict = field(default_factory=dict, repr=False)

    def radius(self, N: int) -> float:
        """``r_N = r * sum_{i<=N} 2^{-i}``."""
        return self.r * (2.0 - 2.0 ** (-N))

    def time(self, N: int) -> float:
        """``T_N``; ``T_0 = T0`` and ``T_N`` decreases to ``T0/2``."""
        return self.T0 / 2 + self.T0 / 2 * (2.0 - (2.0 - 2.0 ** (-N)))

    @property
    def center(self) -> np.ndarray:
        return np.array(self.z0.x + self.z0.y, dtype=float)

    def eta(self, N: int) -> _Radial:
        if N not in self._eta:
            R = self.radius(N + 1)
            self._eta[N] = _Radial(self.center, R, R - self.radius(N))
        return self._eta[N]

    def psi(self, N: int, t, order: int = 0) -> np.ndarray:
        """``psi_N^{(order)}(t)``: 0 for ``t <= T_{N+1}``, 1 for ``t >= T_N``."""
        a, b = self.time(N + 1), self.time(N)
        s = (np.asarray(t, dtype=float) - a) / (b - a)
        return step_derivative(s, order) / (b - a) ** order

    def evaluate(self, N: int, t, X, tau: int = 0, zeta=None) -> np.ndarray:
        """``D_t^tau D_z^zeta phi_N`` at times ``t`` and points ``X`` (broadcast)."""
        X = np.asarray(X, dtype=float)
        return self.psi(N, t, tau) * self.eta(N)(X, zeta)

    def phi(self, N: int):
        """``phi_N`` as a closure over :class:`~kimuralab.geometry.Point`."""
        def f(p: Point) -> float:
            X = np.array(p.z.x + p.z.y, dtype=float)
            return float(self.evaluate(N, p.t, X))
        return f

    def sampled(self, N: int, times, axes, max_order: int) -> SampledField:
        """Field of ``phi_N`` with every slot ``2 tau + |zeta| <= max_order``."""
        n, m = self.z0.n, self.z0.m
        d = n + m
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack(mesh, axis=-1) if d else np.zeros((1, 0))
        times = np.asarray(times, dtype=float)
        derivs = {}
        eta_cache = {}
        for tau in range(max_order // 2 + 1):
            ps = self.psi(N, times, tau).reshape(-1, *([1] * d))
            for order in range(max_order - 2 * tau + 1):
                for tz, zeta in _multi_indices(d, order):
                    if tz or sum(zeta) != order:
                        continue
                    if zeta not in eta_cache:
                        eta_cache[zeta] = self.eta(N)(X, zeta)
                    derivs[(tau, *zeta)] = ps * eta_cache[zeta][None]
        values = derivs[(0,) * (d + 1)]
        return SampledField(times, axes, values, n, m, derivs=derivs)


def build_cutoff_sequence(z0: SpatialPoint, r: float, T0: float, T: float,
                          N_max: int = 6, k: int = 0) -> CutoffSequence:
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0 < T0 < T:
        raise ValueError("need 0 < T0 < T")
    if N_max < 0 or k < 0:
        raise ValueError("N_max and k must be nonnegative")
    return CutoffSequence(z0, float(r), float(T0), float(T), int(N_max), int(k))


def _growth_nodes(seq: CutoffSequence, N: int, per_width: int):
    """Nodes resolving the transition layers of ``phi_N`` at a fixed relative resolution."""
    w = seq.radius(N + 1) - seq.radius(N)
    c = seq.center
    d = len(c)
    # one radial transition layer along the first axis, a thin slab in the others
    lo, hi = seq.radius(N) - 0.25 * w, seq.radius(N + 1) + 0.25 * w
    h = w / per_width
    axes = [c[0] + np.arange(lo, hi + 0.5 * h, h)]
    for i in range(1, d):
        axes.append(c[i] + np.arange(-2, 3) * h)
    a, b = seq.time(N + 1), seq.time(N)
    dt = (b - a) / per_width
    times = np.concatenate([np.arange(a - 0.25 * (b - a), b + 0.25 * (b - a) + 0.5 * dt, dt), [seq.T]])
    return np.clip(times, 0.0, seq.T), axes


def cutoff_growth(seq: CutoffSequence, alpha=UNIFORM, per_width: int = 24,
                  pair_budget: int = 2_000_000):
    """Measured ``m_N = sum_{2 tau + |zeta| = k+2} ||D_t^tau D_z^zeta phi_N||_{C^alpha_WF}``
    for ``N = 0..N_max`` and its least-squares fit (in log space) to
    ``c rho^N (r^{-(k+3)} + T0^{-(k+3)})`` with ``rho = 2^{k+3}``.

    Returns a dict with ``measured``, ``shape``, ``c`` and ``residual``
    (``max_N |m_N / (c s_N) - 1|``).
    """
    from .holder import wf_seminorm

    check_alpha(alpha)
    k = seq.k
    d = seq.z0.n + seq.z0.m
    rho = 2.0 ** (k + 3)
    meas, shape = [], []
    orders = [(tau, z) for tau, z in _multi_indices(d, k + 2) if 2 * tau + sum(z) == k + 2]
    for N in range(seq.N_max + 1):
        times, axes = _growth_nodes(seq, N, per_width)
        times = np.unique(times)
        f = seq.sampled(N, times, axes, k + 2)
        total = 0.0
        for tau, zeta in orders:
            v = f.slot(tau, zeta)
            total += float(np.abs(v).max()) + wf_seminorm(f, alpha, pair_budget, values=v)
        meas.append(total)
        shape.append(rho ** N * (seq.r ** -(k + 3) + seq.T0 ** -(k + 3)))
    meas, shape = np.array(meas), np.array(shape)
    c = float(np.exp(np.mean(np.log(meas / shape))))
    resid = float(np.max(np.abs(meas / (c * shape) - 1.0)))
    return {"N": list(range(seq.N_max + 1)), "measured": meas, "shape": shape,
            "c": c, "residual": resid, "rho": rho}


# --------------------------------------------------------------------------
# partition of unity near the boundary
# --------------------------------------------------------------------------

@dataclass
class PartitionMember:
    center: np.ndarray | None
    region: RegionIndex
    theta: object  # callable X -> values, before normalisation
    psi: object


class Partition:
    """``{phi_N}`` with ``phi_N = theta_N / sum theta`` and companions ``psi_N``.

    Member 0 is the interior function, supported in the closure of
    ``M_emptyset`` (distance to the boundary at least 1, hence more than
    ``r/2``); members ``N >= 1`` are supported in closed
    balls ``B_r(z^N)`` with centres on a lattice of spacing ``r/sqrt(d)``.
    """

    def __init__(self, r: float, n: int, m: int, bounds, members):
        self.r, self.n, self.m = r, n, m
        self.bounds = bounds
        self.members = members

    def __len__(self):
        return len(self.members)

    def theta_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([mb.theta(X) for mb in self.members], axis=-1)

    def phi_matrix(self, X) -> np.ndarray:
        th = self.theta_matrix(X)
        tot = th.sum(axis=-1, keepdims=True)
        if np.any(tot <= 0):
            raise ValueError("point not covered by the partition")
        return th / tot

    def psi_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([mb.psi(X) for mb in self.members], axis=-1)

    def overlap(self, X) -> int:
        return int((self.theta_matrix(X) > 0).sum(axis=-1).max())

    @property
    def overlap_bound(self) -> int:
        """Lattice bound on how many supports can meet at a point."""
        d = self.n + self.m
        per_axis = 2 * int(math.ceil(math.sqrt(d))) + 1
        return per_axis ** d + (1 if self.n else 0)

    def items(self):
        """``(phi_N, psi_N, z^N, I_N)`` as closures over point arrays."""
        out = []
        for N, mb in enumerate(self.members):
            def phi(X, N=N):
                return self.phi_matrix(X)[..., N]
            out.append((phi, mb.psi, mb.center, mb.region))
        return out


def _boundary_distance(X, n):
    X = np.asarray(X, dtype=float)
    if n == 0:
        return np.full(X.shape[:-1], np.inf)
    return X[..., :n].min(axis=-1)


def build_partition(r: float, n: int, m: int, x_max: float = 4.0, y_max: float = 1.0) -> Partition:
    """Partition of unity on ``[0, x_max]^n x [-y_max, y_max]^m``.

    Ball centres cover the boundary-adjacent set ``{min_i x_i <= 1}``; the
    region of a centre is ``I_N = {i : x_i^N <= 3/4}``, which places
    ``B_r(z^N)`` in ``M'_{I_N}`` and ``B_{2r}(z^N)`` in ``M''_{I_N}`` when
    ``r < 1/4``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if r >= 0.25:
        raise ValueError("r must be below 1/4 so that every ball fits its region")
    if n + m < 1 or n < 0 or m < 0:
        raise ValueError("need n + m >= 1")
    if r >= min([x_max] * (n > 0) + [2 * y_max] * (m > 0)):
        raise ValueError("r is too large for the truncated box")
    d = n + m
    h = r / math.sqrt(d)
    bounds = [(0.0, x_max)] * n + [(-y_max, y_max)] * m
    members = []

    def theta0(X):
        return step((_boundary_distance(X, n) - 1.0) / (r / 2))

    def psi0(X):
        return step((_boundary_distance(X, n) - r / 8) / (r / 8))

    members.append(PartitionMember(None, frozenset(), theta0, psi0))
    if n:
        lat = []
        for k, (lo, hi) in enumerate(bounds):
            if k < n:
                lat.append(np.arange(0.0, hi + h, h))
            else:
                lat.append(np.arange(lo - h, hi + 1.5 * h, h))
        mesh = np.meshgrid(*lat, indexing="ij")
        centres = np.stack([g.ravel() for g in mesh], axis=-1)
        # balls reaching the set where theta0 < 1
        centres = centres[_boundary_distance(centres, n) <= 1.0 + r]
        for c in centres:
            region = frozenset(i + 1 for i in range(n) if c[i] <= 0.75)
            th = _ball_step(c, r, r / 2)
            ps = _ball_step(c, 2 * r, r)
            members.append(PartitionMember(c, region, th, ps))
    return Partition(r, n, m, bounds, members)


def _ball_step(c, R, w):
    c = np.asarray(c, dtype=float)

    def f(X):
        X = np.asarray(X, dtype=float)
        return step((R - np.sqrt(((X - c) ** 2).sum(axis=-1))) / w)
    return f
