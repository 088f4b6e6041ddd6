"""Discrete anisotropic Hölder norms of sampled fields.

A :class:`SampledField` lives on a tensor grid ``times x axes[0] x ...``.
Its derivatives are stored in *slots* keyed by ``(tau, zeta_1, ...,
zeta_{n+m})``; they are either filled by stencils (see
:func:`kimuralab.solver.estimate_derivatives`) or computed on demand from
an analytic source expression.  The norm routines never differentiate raw
values themselves.

Every number produced here is a maximum over grid nodes, hence a lower
bound for the continuum quantity on the sampled box.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import exprlang as el
from .exprlang import Expr
from .geometry import RegionIndex, all_regions, region_mask
from .pairs import Nodes, check_alpha, max_ratio_all, max_ratio_cross, max_ratio_pairs

__all__ = [
    "SampledField", "HolderReport", "MissingDerivative", "SupportViolation",
    "sup_norm", "wf_seminorm", "wf_norm_alpha", "wf_norm_2alpha",
    "check_lemma_Lu_bound", "DEFAULT_PAIR_BUDGET",
]

DEFAULT_PAIR_BUDGET = 2_000_000


class MissingDerivative(KeyError):
    pass


class SupportViolation(ValueError):
    pass


def _key(tau: int, zeta) -> tuple:
    return (int(tau), *(int(z) for z in zeta))


class SampledField:
    """Values (and optional derivative slots) on a space-time tensor grid.

    Parameters
    ----------
    times : array_like, shape (nt,)
    axes : list of 1-D arrays
        Node coordinates, degenerate axes first.
    values : array_like, shape (nt, *shape)
    n, m : int
    derivs : dict, optional
        Slot arrays keyed by ``(tau, zeta...)``; the ``(0, 0, ..)`` slot is
        the values themselves.
    mask : bool array, optional
        Nodes that belong to the field (used for non-box restrictions).
    source : Expr, optional
        Analytic form; missing slots are then obtained by differentiation.
    """

    def __init__(self, times, axes, values, n: int, m: int, grid=None,
                 derivs: Optional[dict] = None, mask=None, source: Expr | None = None):
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.n, self.m = int(n), int(m)
        if len(self.axes) != self.n + self.m:
            raise ValueError("need one axis per spatial coordinate")
        shape = (len(self.times), *(len(a) for a in self.axes))
        self.values = np.asarray(values, dtype=float).reshape(shape)
        self.grid = grid
        self.source = source
        self.mask = None if mask is None else np.broadcast_to(np.asarray(mask, dtype=bool), shape)
        self._slots = {}
        zero = _key(0, [0] * (self.n + self.m))
        for k, v in (derivs or {}).items():
            k = tuple(int(q) for q in k)
            if len(k) != self.n + self.m + 1:
                raise ValueError(f"bad slot key {k}")
            self._slots[k] = np.asarray(v, dtype=float).reshape(shape)
        self._slots[zero] = self.values
        self._nodes = None

    # -- construction -------------------------------------------------------
    @classmethod
    def from_expr(cls, expr, times, axes, n: int, m: int, mask=None) -> "SampledField":
        if isinstance(expr, str):
            expr = el.parse(expr, n=n, m=m)
        f = cls(times, axes, np.zeros((len(np.atleast_1d(times)), *(len(a) for a in axes))),
                n, m, mask=mask, source=expr)
        f.values = f._evaluate(expr)
        f._slots[_key(0, [0] * (n + m))] = f.values
        return f

    def with_values(self, values, source: Expr | None = None) -> "SampledField":
        return SampledField(self.times, self.axes, values, self.n, self.m, grid=self.grid,
                            mask=self.mask, source=source)

    # -- geometry -----------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size) if self.mask is None else int(self.mask.sum())

    def mesh(self) -> list:
        """Coordinate tensors ``[t, x1.., y1..]`` broadcast to the full shape."""
        return np.meshgrid(self.times, *self.axes, indexing="ij")

    def env(self) -> dict:
        mesh = self.mesh()
        env = {"t": mesh[0]}
        env.update({f"x{i + 1}": mesh[1 + i] for i in range(self.n)})
        env.update({f"y{l + 1}": mesh[1 + self.n + l] for l in range(self.m)})
        return env

    def nodes(self) -> Nodes:
        if self._nodes is None:
            mesh = self.mesh()
            d = self.n + self.m
            t = mesh[0].ravel()
            x = np.stack([mesh[1 + i].ravel() for i in range(self.n)], axis=-1) if self.n \
                else np.zeros((t.size, 0))
            y = np.stack([mesh[1 + self.n + l].ravel() for l in range(self.m)], axis=-1) if self.m \
                else np.zeros((t.size, 0))
            assert x.shape[1] + y.shape[1] == d
            self._nodes = Nodes(t, x, y)
        return self._nodes

    def flat_mask(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.values.size, dtype=bool)
        return self.mask.ravel()

    def box(self) -> str:
        """Text description of the sampled box (reported with every norm)."""
        names = ["t"] + [f"x{i + 1}" for i in range(self.n)] + [f"y{l + 1}" for l in range(self.m)]
        arrs = [self.times] + self.axes
        return ";".join(f"{nm}[{float(a.min())!r},{float(a.max())!r}]" for nm, a in zip(names, arrs))

    # -- slots --------------------------------------------------------------
    def _evaluate(self, expr: Expr) -> np.ndarray:
        v = el.evaluate(expr, self.env())
        return np.broadcast_to(np.asarray(v, dtype=float), self.shape).copy()

    def has_slot(self, tau: int, zeta) -> bool:
        return _key(tau, zeta) in self._slots or self.source is not None

    def slot(self, tau: int, zeta) -> np.ndarray:
        k = _key(tau, zeta)
        if len(k) != self.n + self.m + 1:
            raise ValueError("zeta has the wrong length")
        if k not in self._slots:
            if self.source is None:
                raise MissingDerivative(f"derivative slot {k} is not available")
            e = self.source
            names = [f"x{i + 1}" for i in range(self.n)] + [f"y{l + 1}" for l in range(self.m)]
            for _ in range(k[0]):
                e = el.differentiate(e, "t")
            for name, order in zip(names, k[1:]):
                for _ in range(order):
                    e = el.differentiate(e, name)
            self._slots[k] = self._evaluate(e)
        return self._slots[k]

    def derivative(self, tau: int, zeta) -> "SampledField":
        src = None
        if self.source is not None:
            src = self.source
            names = [f"x{i + 1}" for i in range(self.n)] + [f"y{l + 1}" for l in range(self.m)]
            for _ in range(tau):
                src = el.differentiate(src, "t")
            for name, order in zip(names, zeta):
                for _ in range(order):
                    src = el.differentiate(src, name)
        out = self.with_values(self.slot(tau, zeta), source=src)
        if src is None:
            # carry over the slots that are derivatives of this one
            for k, v in self._slots.items():
                if k[0] >= tau and all(a >= b for a, b in zip(k[1:], zeta)):
                    out._slots.setdefault(_key(k[0] - tau, np.subtract(k[1:], zeta)), v)
        return out

    # -- restriction --------------------------------------------------------
    def restrict(self, t_range=None, box=None, ball=None) -> "SampledField":
        """Sub-field on ``t_range x box`` and/or a closed Euclidean ball.

        ``box`` is a sequence of ``(lo, hi)`` per spatial axis (None to keep
        an axis whole); ``ball`` is ``(center, radius)``.
        """
        sl = [slice(None)]
        if t_range is not None:
            lo, hi = t_range
            idx = np.nonzero((self.times >= lo - 1e-12) & (self.times <= hi + 1e-12))[0]
            if idx.size == 0:
                raise ValueError("empty time range")
            sl[0] = slice(idx[0], idx[-1] + 1)
        for k, a in enumerate(self.axes):
            b = None if box is None else box[k]
            if b is None:
                sl.append(slice(None))
                continue
            idx = np.nonzero((a >= b[0] - 1e-12) & (a <= b[1] + 1e-12))[0]
            if idx.size == 0:
                raise ValueError(f"empty restriction on axis {k}")
            sl.append(slice(idx[0], idx[-1] + 1))
        sl = tuple(sl)
        times = self.times[sl[0]]
        axes = [a[s] for a, s in zip(self.axes, sl[1:])]
        mask = None if self.mask is None else self.mask[sl]
        out = SampledField(times, axes, self.values[sl], self.n, self.m, grid=None,
                           derivs={k: v[sl] for k, v in self._slots.items()},
                           mask=mask, source=self.source)
        if ball is not None:
            center, radius = ball
            center = np.asarray(center, dtype=float)
            mesh = np.meshgrid(*axes, indexing="ij")
            r2 = sum((g - c) ** 2 for g, c in zip(mesh, center))
            inside = np.broadcast_to(r2 <= radius ** 2 * (1 + 1e-12), out.shape)
            out.mask = inside if out.mask is None else (out.mask & inside)
        if out.size == 0:
            raise ValueError("restriction is empty")
        return out

    def take(self, t_step: int = 1, steps=None) -> "SampledField":
        """Every ``t_step``-th time and every ``steps[k]``-th node on axis ``k``
        (slots included); used to compare fields on common probe nodes."""
        steps = [1] * len(self.axes) if steps is None else list(steps)
        sl = (slice(None, None, t_step), *(slice(None, None, s) for s in steps))
        mask = None if self.mask is None else self.mask[sl]
        return SampledField(self.times[sl[0]], [a[s] for a, s in zip(self.axes, sl[1:])],
                            self.values[sl], self.n, self.m,
                            derivs={k: v[sl] for k, v in self._slots.items()},
                            mask=mask, source=self.source)

    def region_node_mask(self, region: RegionIndex, kind: str = "M") -> np.ndarray:
        """Flat mask of nodes in the closure of ``M_I`` (or M', M'')."""
        nodes = self.nodes()
        return region_mask(nodes.x, region, kind) & self.flat_mask()


# --------------------------------------------------------------------------
# seminorms
# --------------------------------------------------------------------------

def sup_norm(u: SampledField, values=None, mask=None) -> float:
    v = u.values if values is None else values
    msk = u.flat_mask() if mask is None else mask
    flat = np.asarray(v, dtype=float).ravel()[msk]
    if flat.size == 0:
        raise ValueError("empty field")
    return float(np.max(np.abs(flat)))


def _stride_indices(n: int, s: int) -> np.ndarray:
    idx = np.arange(0, n, s)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def _seminorm(u: SampledField, values: np.ndarray, mask: np.ndarray, alpha, budget: int):
    """Returns ``(value, pairs_used)``; see :func:`wf_seminorm`."""
    alpha = check_alpha(alpha)
    flat = np.asarray(values, dtype=float).ravel()
    sel = np.nonzero(mask)[0]
    N = sel.size
    if N < 2:
        return 0.0, 0
    nodes = u.nodes()
    if N * N <= budget:
        best, count, _ = max_ratio_all(nodes.take(sel), flat[sel], alpha)
        return best, count
    shape = u.shape
    D = sum(1 for s in shape if s > 1)
    s = max(2, int(math.ceil((N * N / budget) ** (1.0 / (2 * D)))))
    while True:
        grids = np.meshgrid(*[_stride_indices(k, s) for k in shape], indexing="ij")
        sub = np.ravel_multi_index([g.ravel() for g in grids], shape)
        sub = sub[mask[sub]]
        if sub.size * sub.size <= budget or s > max(shape):
            break
        s += 1
    best, count, (p, q) = max_ratio_all(nodes.take(sub), flat[sub], alpha)
    p, q = int(sub[p]), int(sub[q])
    # nearest neighbours along every axis
    idx = np.arange(flat.size)
    multi = np.unravel_index(idx, shape)
    strides = [int(np.prod(shape[k + 1:])) for k in range(len(shape))]
    for k, size in enumerate(shape):
        if size < 2:
            continue
        a = idx[(multi[k] < size - 1)]
        b = a + strides[k]
        keep = mask[a] & mask[b]
        v, c, _ = max_ratio_pairs(nodes, flat, alpha, a[keep], b[keep])
        best, count = max(best, v), count + c
    # local refinement around the best strided pair
    if p != q:
        near_p, near_q = _neighbourhood(p, shape, s, mask), _neighbourhood(q, shape, s, mask)
        v, c, _ = max_ratio_cross(nodes, flat, alpha, near_p, near_q)
        best, count = max(best, v), count + c
    return best, count


def _neighbourhood(p: int, shape, radius: int, mask) -> np.ndarray:
    centre = np.unravel_index(p, shape)
    ranges = [np.arange(max(0, c - radius), min(n, c + radius + 1)) for c, n in zip(centre, shape)]
    grids = np.meshgrid(*ranges, indexing="ij")
    out = np.ravel_multi_index([g.ravel() for g in grids], shape)
    return out[mask[out]]


def wf_seminorm(u: SampledField, alpha, pair_budget: int = DEFAULT_PAIR_BUDGET,
                values=None, mask=None, return_count: bool = False):
    """Largest ``|u(P) - u(Q)| / rho(P, Q)^alpha`` over a deterministic pair set.

    All pairs are used when ``node_count**2 <= pair_budget``.  Otherwise the
    nodes are subsampled with a fixed stride ``s`` per tensor axis (the
    smallest ``s >= ceil((N^2 / budget)^(1/(2D)))`` meeting the budget),
    and the set is completed by every nearest-neighbour pair along each axis
    and all pairs between the index boxes of radius ``s`` around the best
    strided pair.  The result never exceeds the exhaustive value.

    ``alpha`` may be the string ``"uniform"`` for the supremum over
    ``alpha in (0, 1)`` (denominator ``min(rho, 1)``).
    """
    v = u.values if values is None else values
    msk = u.flat_mask() if mask is None else mask
    if not np.any(msk):
        raise ValueError("empty field")
    best, count = _seminorm(u, v, msk, alpha, int(pair_budget))
    return (best, count) if return_count else best


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

@dataclass
class HolderReport:
    """Breakdown of a discrete WF norm.

    ``weighted_component_norms`` maps component names to their
    contribution to ``total`` (summed over regions); ``regions`` holds the
    per-region breakdown.
    """

    sup_norm: float
    seminorm_alpha: float
    weighted_component_norms: dict
    total: float
    pair_count_used: int
    regions: dict = field(default_factory=dict)
    alpha: object = None
    k: int = 0
    box: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("component,value\n")
        buf.write(f"box,{self.box}\n")
        buf.write(f"alpha,{self.alpha!r}\n")
        buf.write(f"k,{self.k}\n")
        buf.write(f"sup_norm,{self.sup_norm!r}\n")
        buf.write(f"seminorm_alpha,{self.seminorm_alpha!r}\n")
        for name, v in self.weighted_component_norms.items():
            buf.write(f"\"{name}\",{v!r}\n")
        buf.write(f"total,{self.total!r}\n")
        buf.write(f"pair_count_used,{self.pair_count_used}\n")
        return buf.getvalue()


def _multi_indices(d: int, k: int):
    """``(tau, zeta)`` with ``2 tau + |zeta| <= k``, in a fixed order."""
    out = []
    for tau in range(k // 2 + 1):
        for order in range(k - 2 * tau + 1):
            for combo in itertools.combinations_with_replacement(range(d), order):
                z = [0] * d
                for a in combo:
                    z[a] += 1
                out.append((tau, tuple(z)))
    return out


def _dlabel(tau: int, zeta, names) -> str:
    parts = (["t"] * tau) + [nm for nm, z in zip(names, zeta) for _ in range(z)]
    return "D_" + "".join(parts) + " " if parts else ""


def _holder_alpha(u, values, mask, alpha, budget):
    sel = values.ravel()[mask]
    if sel.size == 0:
        return 0.0, 0.0, 0
    s = float(np.max(np.abs(sel)))
    sn, c = _seminorm(u, values, mask, alpha, budget)
    return s, sn, c


def wf_norm_alpha(u: SampledField, alpha, k: int = 0,
                  pair_budget: int = DEFAULT_PAIR_BUDGET) -> HolderReport:
    """Discrete ``C^{k,alpha}_WF`` norm: sum of ``C^alpha_WF`` norms of
    ``D_t^tau D_z^zeta u`` over ``2 tau + |zeta| <= k``."""
    check_alpha(alpha)
    d = u.n + u.m
    names = [f"x{i + 1}" for i in range(u.n)] + [f"y{l + 1}" for l in range(u.m)]
    mask = u.flat_mask()
    if not mask.any():
        raise ValueError("empty field")
    comps, pairs = {}, 0
    sup0, semi0 = 0.0, 0.0
    for tau, zeta in _multi_indices(d, k):
        vals = u.slot(tau, zeta)
        s, sn, c = _holder_alpha(u, vals, mask, alpha, pair_budget)
        label = _dlabel(tau, zeta, names) or "u"
        comps[label.strip()] = s + sn
        pairs += c
        if tau == 0 and not any(zeta):
            sup0, semi0 = s, sn
    return HolderReport(sup0, semi0, comps, float(sum(comps.values())), pairs,
                        alpha=alpha, k=k, box=u.box())


def _components(u: SampledField, region: RegionIndex, tau: int, zeta):
    """``(name, weighted values)`` for one derivative in one region."""
    n, m = u.n, u.m
    d = n + m
    mesh = np.meshgrid(u.times, *u.axes, indexing="ij")
    xs = mesh[1:1 + n]
    I = [i for i in range(n) if (i + 1) in region]
    Ic = [i for i in range(n) if (i + 1) not in region]
    xn = [f"x{i + 1}" for i in range(n)]
    yn = [f"y{l + 1}" for l in range(m)]

    def sl(*axes_):
        z = list(zeta)
        for a in axes_:
            z[a] += 1
        return u.slot(tau, z)

    out = [("u", sl())]
    out += [(f"u_{xn[i]}", sl(i)) for i in range(n)]
    out += [(f"u_{yn[l]}", sl(n + l)) for l in range(m)]
    for i in I:
        for j in I:
            out.append((f"sqrt({xn[i]} {xn[j]}) u_{xn[i]}{xn[j]}", np.sqrt(xs[i] * xs[j]) * sl(i, j)))
    for k_ in range(m):
        for l in range(m):
            out.append((f"u_{yn[k_]}{yn[l]}", sl(n + k_, n + l)))
    for i in I:
        for j in Ic:
            out.append((f"sqrt({xn[i]}) u_{xn[i]}{xn[j]}", np.sqrt(xs[i]) * sl(i, j)))
    for i in I:
        for l in range(m):
            out.append((f"sqrt({xn[i]}) u_{xn[i]}{yn[l]}", np.sqrt(xs[i]) * sl(i, n + l)))
    for i in Ic:
        for j in Ic:
            out.append((f"u_{xn[i]}{xn[j]}", sl(i, j)))
    for i in Ic:
        for l in range(m):
            out.append((f"u_{xn[i]}{yn[l]}", sl(i, n + l)))
    z = list(zeta)
    out.append(("u_t", u.slot(tau + 1, z)))
    assert len(zeta) == d
    return out


def wf_norm_2alpha(u: SampledField, alpha, k: int = 0,
                   pair_budget: int = DEFAULT_PAIR_BUDGET) -> HolderReport:
    """Discrete ``C^{k,2+alpha}_WF`` norm with its full breakdown.

    For every region ``I`` the nodes in the closure of ``M_I`` are used;
    regions without nodes contribute 0.  Component names carry the region
    and, for ``k > 0``, the applied derivative, e.g.
    ``"I={1}: D_x1 sqrt(x1 x1) u_x1x1"``.
    """
    check_alpha(alpha)
    if k < 0:
        raise ValueError("k must be >= 0")
    d = u.n + u.m
    names = [f"x{i + 1}" for i in range(u.n)] + [f"y{l + 1}" for l in range(u.m)]
    full = u.flat_mask()
    if not full.any():
        raise ValueError("empty field")
    comps, regions, pairs = {}, {}, 0
    for region in all_regions(u.n):
        mask = u.region_node_mask(region)
        if not mask.any():
            continue
        rname = "I={" + ",".join(str(i) for i in sorted(region)) + "}"
        rc = {}
        for tau, zeta in _multi_indices(d, k):
            prefix = _dlabel(tau, zeta, names)
            for name, vals in _components(u, region, tau, zeta):
                s, sn, c = _holder_alpha(u, vals, mask, alpha, pair_budget)
                rc[prefix + name] = s + sn
                pairs += c
        regions[rname] = rc
        for name, v in rc.items():
            comps[f"{rname}: {name}"] = v
    sup0 = sup_norm(u)
    semi0, c = _seminorm(u, u.values, full, alpha, pair_budget)
    pairs += c
    total = float(sum(comps.values()))
    return HolderReport(sup0, semi0, comps, total, pairs, regions, alpha=alpha, k=k, box=u.box())


# --------------------------------------------------------------------------
# the L u estimate
# --------------------------------------------------------------------------

def lu_field(L, u: SampledField) -> SampledField:
    """``L u`` on the nodes of ``u``: symbolic when ``u`` has a source
    expression, otherwise assembled from the derivative slots."""
    from .operator import apply_expr, coefficient_values

    if u.source is not None:
        e = apply_expr(L, u.source)
        return SampledField.from_expr(e, u.times, u.axes, u.n, u.m, mask=u.mask)
    n, m = L.n, L.m
    env = u.env()
    vals = coefficient_values(L, {k: v for k, v in env.items() if k != "t"})
    fx = [L.factor_value(i, env[f"x{i + 1}"]) for i in range(n)]
    d = n + m

    def sl(*axes_):
        z = [0] * d
        for a in axes_:
            z[a] += 1
        return u.slot(0, z)

    out = np.zeros(u.shape)
    for i in range(n):
        out += fx[i] * vals["a"][i] * sl(i, i) + vals["b"][i] * sl(i)
        for j in range(n):
            out += fx[i] * fx[j] * vals["atilde"][i][j] * sl(i, j)
        for l in range(m):
            out += fx[i] * vals["c"][i][l] * sl(i, n + l)
    for k_ in range(m):
        out += vals["e"][k_] * sl(n + k_)
        for l in range(m):
            out += vals["d"][k_][l] * sl(n + k_, n + l)
    return u.with_values(out)


def _support_region_check(u: SampledField, region: RegionIndex, tol: float = 1e-12):
    mask = u.region_node_mask(region, "M''")
    vals = np.abs(u.values).ravel()
    scale = max(vals.max(), 1.0)
    outside = vals[~mask & u.flat_mask()]
    if outside.size and outside.max() > tol * scale:
        raise SupportViolation(f"field is not supported in the closure of M''_{set(region)}")


def check_lemma_Lu_bound(Lc, u: SampledField, I: RegionIndex, alpha, eps_grid, k: int = 0,
                         constants: Optional[tuple] = None,
                         pair_budget: int = DEFAULT_PAIR_BUDGET):
    """Test ``||Lu||_{k,alpha} <= (Lambda + C eps) ||u||_{k,2+alpha} + C eps^{-m_k} ||u||_C``.

    ``Lambda`` comes from :func:`kimuralab.operator.compute_Lambda` on the
    sampled box; ``(C, m_k)`` default to the frozen calibration table.  For
    each ``eps`` the smallest admissible ``C`` is computed; the check passes
    when the largest of these does not exceed the tabulated ``C``.
    """
    from .operator import Box, compute_Lambda
    from .reports import VerifyReport
    from .solver import config_hash

    _support_region_check(u, I)
    if constants is None:
        from .interpolation import lemma_constants
        constants = lemma_constants(u.n, u.m, alpha, k)
    C_tab, m_k = constants
    eps = np.asarray(eps_grid, dtype=float)
    Lu = lu_field(Lc, u)
    lhs = wf_norm_alpha(Lu, alpha, k, pair_budget).total
    xb = tuple((float(a.min()), float(a.max())) for a in u.axes[:u.n])
    yb = tuple((float(a.min()), float(a.max())) for a in u.axes[u.n:])
    Lam = compute_Lambda(Lc, Box(xb, yb), I)
    n2 = wf_norm_2alpha(u, alpha, k, pair_budget).total
    s = sup_norm(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.where(eps * n2 + eps ** (-m_k) * s > 0,
                        (lhs - Lam * n2) / (eps * n2 + eps ** (-m_k) * s), 0.0)
    C_needed = float(max(0.0, np.max(need))) if need.size else 0.0
    passed = C_needed <= C_tab
    return VerifyReport(
        "lemma_Lu", config_hash(alpha, k, sorted(I), eps, Lc.a, Lc.b),
        {"LHS": lhs, "Lambda": Lam, "norm_2alpha": n2, "sup": s,
         "C_needed": C_needed, "C": float(C_tab), "m_k": float(m_k),
         "LHS_over_Lambda_norm": lhs / (Lam * n2) if Lam * n2 > 0 else float("nan")},
        passed, {"C": float(C_tab)})
