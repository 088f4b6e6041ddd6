"""Finite-difference solver for ``u_t - L u = g``, ``u(0) = f`` on a truncated box.

The degenerate axes use nodes ``x_j = X_max (j/J)^2`` (uniform in
``sqrt(x)``); tangential axes are uniform on ``[-Y_max, Y_max]``.  No
boundary condition is imposed on the faces ``x_i = 0``: the equation
itself is discretised there, with the ``x_i``-weighted terms vanishing and
the drift ``b_i u_{x_i}`` taken as a one-sided difference into the domain.
The artificial outer faces are either pinned to an exact solution
(``"oracle-Dirichlet"``) or closed by linear extrapolation
(``"buffer-extrapolation"``).
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import exprlang as el
from .exprlang import Expr
from .operator import CoefficientSet, NonnegativityViolation, coefficient_values
from .stencils import along_axis, first_derivative, one_sided_first, second_derivative

__all__ = [
    "Grid", "SolveConfig", "SpaceTimeField", "SolverBreakdown",
    "graded_nodes", "make_grid", "discretize", "solve_ivp", "estimate_derivatives",
    "config_hash",
]

log = logging.getLogger(__name__)

SCHEMES = ("implicit-euler", "crank-nicolson")
BOUNDARY_MODES = ("oracle-Dirichlet", "buffer-extrapolation")


class SolverBreakdown(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    n: int = 1
    m: int = 0
    J: int = 32
    x_max: float = 4.0
    Ny: int = 16
    y_max: float = 1.0
    T: float = 1.0
    dt: float = 0.01
    scheme: str = "implicit-euler"
    boundary: str = "buffer-extrapolation"
    tol: float = 1e-12
    margin: float = 0.5
    drift: str = "central"
    store_every: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
        if self.drift not in ("central", "hybrid"):
            raise ValueError("drift must be 'central' or 'hybrid'")
        if not (self.dt > 0 and self.T > 0 and self.tol > 0):
            raise ValueError("dt, T and tol must be positive")
        if not 0 < self.margin < 1:
            raise ValueError("margin must lie in (0, 1)")
        if self.n < 0 or self.m < 0 or self.n + self.m < 1:
            raise ValueError("need n + m >= 1")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.T / self.dt)))


def config_hash(*parts) -> str:
    """Short stable digest of dataclasses / strings / numbers."""
    def norm(p):
        if hasattr(p, "__dataclass_fields__"):
            return {k: norm(v) for k, v in asdict(p).items()}
        if isinstance(p, Expr):
            return el.to_string(p)
        if isinstance(p, (list, tuple)):
            return [norm(v) for v in p]
        if isinstance(p, dict):
            return {str(k): norm(v) for k, v in p.items()}
        if isinstance(p, np.ndarray):
            return hashlib.sha256(np.ascontiguousarray(p).tobytes()).hexdigest()
        if isinstance(p, float):
            return repr(p)
        return p if isinstance(p, (int, str, bool, type(None))) else repr(p)

    blob = json.dumps([norm(p) for p in parts], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def graded_nodes(J: int, x_max: float) -> np.ndarray:
    """``x_max * (j/J)**2`` for ``j = 0..J``."""
    if J < 1 or x_max <= 0:
        raise ValueError("need J >= 1 and x_max > 0")
    j = np.arange(J + 1, dtype=float)
    return x_max * (j / J) ** 2


@dataclass(frozen=True, eq=False)
class Grid:
    n: int
    m: int
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    T: float
    dt: float

    @property
    def axes(self) -> list:
        return [self.x_nodes] * self.n + [self.y_nodes] * self.m

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def times(self) -> np.ndarray:
        steps = max(1, int(round(self.T / self.dt)))
        return np.linspace(0.0, self.T, steps + 1)

    def mesh(self) -> list:
        return np.meshgrid(*self.axes, indexing="ij")

    def env(self, t: float | None = None) -> dict:
        """Flattened node coordinates as expression bindings."""
        mesh = self.mesh()
        env = {f"x{i + 1}": mesh[i].ravel() for i in range(self.n)}
        env.update({f"y{l + 1}": mesh[self.n + l].ravel() for l in range(self.m)})
        if t is not None:
            env["t"] = np.full(self.size, float(t))
        return env

    def outer_mask(self) -> np.ndarray:
        """Nodes on the artificial outer faces (flattened)."""
        idx = np.indices(self.shape).reshape(len(self.shape), -1)
        out = np.zeros(self.size, dtype=bool)
        for k, size in enumerate(self.shape):
            out |= idx[k] == size - 1
            if k >= self.n:
                out |= idx[k] == 0
        return out

    def degenerate_face_mask(self, i: int) -> np.ndarray:
        idx = np.indices(self.shape).reshape(len(self.shape), -1)
        return idx[i] == 0


def make_grid(cfg: SolveConfig) -> Grid:
    if cfg.J < 8:
        raise ValueError(f"J must be at least 8, got {cfg.J}")
    if cfg.m and (cfg.Ny < 2 or cfg.y_max <= 0):
        raise ValueError("need Ny >= 2 and y_max > 0")
    x = graded_nodes(cfg.J, cfg.x_max)
    y = np.linspace(-cfg.y_max, cfg.y_max, cfg.Ny + 1) if cfg.m else np.zeros(0)
    return Grid(cfg.n, cfg.m, x, y, cfg.T, cfg.dt)


# --------------------------------------------------------------------------
# spatial operator
# --------------------------------------------------------------------------

def _node_values(L: CoefficientSet, grid: Grid) -> dict:
    return coefficient_values(L, grid.env())


def discretize(L: CoefficientSet, grid: Grid, check: bool = True,
               drift: str = "central") -> sp.csr_matrix:
    """Sparse matrix of ``L`` on every node of ``grid`` (C order).

    Interior rows use central differences on the nonuniform nodes.  On the
    faces ``x_i = 0`` the ``x_i``-weighted terms are dropped and the drift
    uses a forward difference.  Rows on the outer faces use one-sided
    second-order stencils; the time stepper replaces them.

    ``drift="hybrid"`` switches the drift to an upwind difference at nodes
    where the central stencil would give a negative neighbour weight.
    """
    if grid.n != L.n or grid.m != L.m:
        raise ValueError("grid mismatch")
    if not all(L.degenerate):
        raise ValueError("the solver needs every x axis to be degenerate")
    n, m, shape = L.n, L.m, grid.shape
    vals = _node_values(L, grid)
    env = grid.env()
    if check:
        for i in range(n):
            face = grid.degenerate_face_mask(i)
            bmin = float(np.min(vals["b"][i][face])) if face.any() else 0.0
            if bmin < 0:
                raise NonnegativityViolation(f"b{i + 1} = {bmin} < 0 on the face x{i + 1} = 0")
    axes = grid.axes
    D1 = [along_axis(first_derivative(a, low="first" if k < n else "second"), k, shape)
          for k, a in enumerate(axes)]
    D2 = [along_axis(second_derivative(a), k, shape) for k, a in enumerate(axes)]
    xs = [env[f"x{i + 1}"] for i in range(n)]
    N = grid.size
    A = sp.csr_matrix((N, N))

    def term(coef, op):
        coef = np.asarray(coef, dtype=float)
        if not np.any(coef):
            return 0
        return sp.diags(coef) @ op

    for i in range(n):
        diff = xs[i] * vals["a"][i] + xs[i] * xs[i] * vals["atilde"][i][i]
        A = A + term(diff, D2[i])
        A = A + _drift_term(vals["b"][i], diff, axes[i], i, shape, drift, low_first=True)
        for j in range(n):
            if j != i:
                A = A + term(xs[i] * xs[j] * vals["atilde"][i][j], D1[i] @ D1[j])
        for l in range(m):
            A = A + term(xs[i] * vals["c"][i][l], D1[i] @ D1[n + l])
    for k in range(m):
        A = A + term(vals["d"][k][k], D2[n + k])
        A = A + _drift_term(vals["e"][k], vals["d"][k][k], axes[n + k], n + k, shape, drift,
                            low_first=False)
        for l in range(m):
            if l != k:
                A = A + term(vals["d"][k][l], D1[n + k] @ D1[n + l])
    A = sp.csr_matrix(A)
    A.eliminate_zeros()
    return A


def _drift_term(b, diff, s, axis, shape, drift, low_first):
    b = np.asarray(b, dtype=float)
    if not np.any(b):
        return 0
    D1 = along_axis(first_derivative(s, low="first" if low_first else "second"), axis, shape)
    if drift == "central":
        return sp.diags(b) @ D1
    # hybrid: central where both neighbour weights stay nonnegative
    idx = np.indices(shape)[axis].ravel()
    K = len(s)
    j = np.clip(idx, 1, K - 2)
    hm, hp = s[j] - s[j - 1], s[j + 1] - s[j]
    interior = (idx > 0) & (idx < K - 1)
    ok = (2 * diff - b * hp >= 0) & (2 * diff + b * hm >= 0)
    central = ~interior | ok
    fwd = along_axis(one_sided_first(s, +1), axis, shape)
    bwd = along_axis(one_sided_first(s, -1), axis, shape)
    up_f = (~central) & (b > 0)
    up_b = (~central) & (b <= 0)
    return (sp.diags(np.where(central, b, 0.0)) @ D1
            + sp.diags(np.where(up_f, b, 0.0)) @ fwd
            + sp.diags(np.where(up_b, b, 0.0)) @ bwd)


# --------------------------------------------------------------------------
# time stepping
# --------------------------------------------------------------------------

@dataclass(eq=False)
class SpaceTimeField:
    grid: Grid
    times: np.ndarray
    values: np.ndarray  # (nt, *grid.shape)
    config_hash: str = ""
    meta: dict = field(default_factory=dict)
    rates: Optional[np.ndarray] = None  # one-step backward differences at the stored times

    def at(self, k: int) -> np.ndarray:
        return self.values[k]

    def sampled(self, with_derivatives: bool = False):
        """The field as a :class:`kimuralab.holder.SampledField`."""
        if with_derivatives:
            return estimate_derivatives(self)
        from .holder import SampledField
        return SampledField(self.times, self.grid.axes, self.values, n=self.grid.n,
                            m=self.grid.m, grid=self.grid)

    def to_csv(self, path) -> None:
        from .fieldio import write_field_csv
        write_field_csv(self, path)


def _as_node_values(data, grid: Grid, t: float) -> np.ndarray:
    if data is None:
        return np.zeros(grid.size)
    if isinstance(data, str):
        data = el.parse(data, n=grid.n, m=grid.m)
    if hasattr(data, "values") and hasattr(data, "times"):
        # a sampled field on this grid: its first time slice
        arr = np.asarray(data.values, dtype=float)[0].reshape(-1)
        if arr.size != grid.size:
            raise ValueError("sampled field does not match the grid")
        return arr.copy()
    if isinstance(data, Expr):
        v = el.evaluate(data, grid.env(t))
        return np.broadcast_to(np.asarray(v, dtype=float), (grid.size,)).copy()
    if callable(data):
        env = grid.env(t)
        v = data(env)
        return np.broadcast_to(np.asarray(v, dtype=float), (grid.size,)).copy()
    if np.isscalar(data):
        return np.full(grid.size, float(data))
    arr = np.asarray(data, dtype=float).reshape(-1)
    if arr.size != grid.size:
        raise ValueError("initial data does not match the grid")
    return arr.copy()


def _extrapolation_rows(grid: Grid) -> sp.csr_matrix:
    """Rows closing the outer faces by linear extrapolation."""
    shape = grid.shape
    N = grid.size
    idx = np.indices(shape).reshape(len(shape), -1)
    strides = np.array([int(np.prod(shape[k + 1:])) for k in range(len(shape))])
    rows, cols, vals = [], [], []
    done = np.zeros(N, dtype=bool)
    for k, size in enumerate(shape):
        s = grid.axes[k]
        ends = [size - 1] if k < grid.n else [size - 1, 0]
        for end in ends:
            sel = np.nonzero((idx[k] == end) & ~done)[0]
            step = -1 if end == size - 1 else 1
            j1, j2 = end + step, end + 2 * step
            ratio = (s[end] - s[j1]) / (s[j1] - s[j2])
            for p in sel:
                p1 = p + step * strides[k]
                p2 = p + 2 * step * strides[k]
                rows += [p, p, p]
                cols += [p, p1, p2]
                vals += [1.0, -(1.0 + ratio), ratio]
            done[sel] = True
    return sp.csr_matrix((vals, (rows, cols)), shape=(N, N))


def solve_ivp(L: CoefficientSet, f, g=None, cfg: SolveConfig | None = None,
              exact: Optional[Callable] = None, A: sp.spmatrix | None = None) -> SpaceTimeField:
    """March ``u_t = L u + g`` from ``u(0) = f`` to ``cfg.T``.

    ``f`` and ``g`` may be expressions (or strings), callables taking the
    node bindings, scalars or node arrays.  ``exact(t, env)`` supplies the
    outer-face values in ``"oracle-Dirichlet"`` mode.
    """
    cfg = cfg or SolveConfig(n=L.n, m=L.m)
    if (cfg.n, cfg.m) != (L.n, L.m):
        raise ValueError("config dimensions do not match the operator")
    grid = make_grid(cfg)
    if A is None:
        A = discretize(L, grid, drift=cfg.drift)
    N = grid.size
    outer = grid.outer_mask()
    if cfg.boundary == "oracle-Dirichlet" and exact is None:
        raise ValueError("oracle-Dirichlet mode needs an exact solution")
    theta = 1.0 if cfg.scheme == "implicit-euler" else 0.5
    steps = cfg.steps
    dt = cfg.T / steps
    I = sp.identity(N, format="csr")
    keep = sp.diags((~outer).astype(float))
    M = keep @ (I - theta * dt * A)
    explicit = keep @ (I + (1 - theta) * dt * A) if theta < 1 else None
    if cfg.boundary == "oracle-Dirichlet":
        M = M + sp.diags(outer.astype(float))
    else:
        M = M + _extrapolation_rows(grid)
    M = sp.csc_matrix(M)
    try:
        lu = spla.splu(M)
        solve = lu.solve
    except RuntimeError:
        log.warning("sparse LU failed; falling back to GMRES (tol=%g)", cfg.tol)

        def solve(rhs):
            x, info = spla.gmres(M, rhs, rtol=cfg.tol, atol=0.0, maxiter=10 * N)
            if info != 0:
                raise SolverBreakdown(f"GMRES did not converge (info={info})")
            return x

    t_grid = np.linspace(0.0, cfg.T, steps + 1)
    u = _as_node_values(f, grid, 0.0)
    if cfg.boundary == "oracle-Dirichlet":
        u[outer] = np.asarray(exact(0.0, grid.env(0.0)), dtype=float).reshape(-1)[outer]
    g_is_zero = g is None or (isinstance(g, (int, float)) and g == 0)
    g_prev = None if g_is_zero else _as_node_values(g, grid, 0.0)
    stored_t, stored, rates = [0.0], [u.reshape(grid.shape).copy()], [None]
    for k in range(1, steps + 1):
        t = t_grid[k]
        rhs = u.copy() if explicit is None else explicit @ u
        if not g_is_zero:
            g_new = _as_node_values(g, grid, t)
            rhs += dt * (theta * g_new + (1 - theta) * g_prev)
            g_prev = g_new
        if cfg.boundary == "oracle-Dirichlet":
            rhs[outer] = np.asarray(exact(t, grid.env(t)), dtype=float).reshape(-1)[outer]
        else:
            rhs[outer] = 0.0
        u_old = u
        u = solve(rhs)
        if not np.all(np.isfinite(u)):
            bad = int(np.argmax(~np.isfinite(u)))
            raise SolverBreakdown(f"non-finite value at step {k} (t={t}), node {bad}")
        if k % cfg.store_every == 0 or k == steps:
            stored_t.append(t)
            stored.append(u.reshape(grid.shape).copy())
            rates.append(((u - u_old) / dt).reshape(grid.shape))
        if k == 1:
            rates[0] = ((u - u_old) / dt).reshape(grid.shape)
    h = config_hash(cfg, L.a, L.atilde, L.b, L.c, L.d, L.e, _describe(f), _describe(g))
    return SpaceTimeField(grid, np.array(stored_t), np.array(stored), h,
                          meta={"scheme": cfg.scheme, "boundary": cfg.boundary, "dt": dt},
                          rates=np.array(rates))


def _describe(data):
    if isinstance(data, Expr):
        return el.to_string(data)
    if isinstance(data, np.ndarray):
        return data
    if callable(data):
        return getattr(data, "description", repr(data))
    return data


# --------------------------------------------------------------------------
# derivative estimates
# --------------------------------------------------------------------------

def estimate_derivatives(u):
    """Derivative slots up to second order in space and first order in time.

    ``u`` is a :class:`SpaceTimeField` or a plain sampled field (e.g. one
    read back from a field table).

    Spatial derivatives use central stencils inside and one-sided
    second-order stencils on the faces.  ``u_t`` is the one-step backward
    difference recorded by the time stepper; fields without it fall back
    to differences between stored slices (forward at the first one).
    """
    from .holder import SampledField

    grid = getattr(u, "grid", None)
    if grid is not None:
        axes, n, m = grid.axes, grid.n, grid.m
    else:
        axes, n, m = list(u.axes), u.n, u.m
    shape = tuple(len(a) for a in axes)
    if any(s < 3 for s in shape):
        raise ValueError("need at least 3 nodes per axis")
    d = n + m
    nt = len(u.times)
    V = u.values.reshape(nt, -1)
    D1 = [along_axis(first_derivative(a), k, shape) for k, a in enumerate(axes)]
    D2 = [along_axis(second_derivative(a), k, shape) for k, a in enumerate(axes)]
    slots = {}
    zero = (0,) * d

    def key(tau, *axes_):
        z = [0] * d
        for a in axes_:
            z[a] += 1
        return (tau, *z)

    slots[(0, *zero)] = u.values
    for a in range(d):
        slots[key(0, a)] = (D1[a] @ V.T).T.reshape(u.values.shape)
        slots[key(0, a, a)] = (D2[a] @ V.T).T.reshape(u.values.shape)
        for b in range(a + 1, d):
            slots[key(0, a, b)] = ((D1[a] @ (D1[b] @ V.T))).T.reshape(u.values.shape)
    rates = getattr(u, "rates", None)
    if rates is not None:
        slots[key(1)] = rates
    elif nt >= 2:
        ut = np.empty_like(u.values)
        dtv = np.diff(u.times)
        ut[1:] = np.diff(u.values, axis=0) / dtv.reshape(-1, *([1] * len(shape)))
        ut[0] = ut[1]
        slots[key(1)] = ut
    return SampledField(u.times, axes, u.values, n=n, m=m, grid=grid, derivs=slots)
