"""Desk-scale experiments that turn the a priori estimates into reports.

The continuum constants are existence-only, so the pass criteria are
stability and boundedness of measured ratios across controlled sweeps.
The default thresholds live in :data:`THRESHOLDS`.

Norms of numerical solutions are evaluated on *probe nodes*: the nodes of
the coarsest grid of a refinement study, sampled identically at every
level, inside the verification region (the box minus its outer
``margin`` fraction).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import exprlang as el
from .exprlang import Expr
from .holder import (SampledField, _support_region_check, lu_field, sup_norm,
                     wf_norm_2alpha, wf_norm_alpha, DEFAULT_PAIR_BUDGET)
from .operator import CoefficientSet
from .reports import VerifyReport
from .solver import SolveConfig, config_hash, estimate_derivatives, make_grid, solve_ivp

__all__ = [
    "THRESHOLDS", "Problem", "RoughData", "RoughDataFamily",
    "max_principle_check", "comparison_check", "interp_check",
    "schauder_ratio_local", "schauder_ratio_global", "smoothing_check",
    "oracle_compare", "refinement_growth_ok",
]

THRESHOLDS = {
    "family_ratio": 3.0,      # max Q / min Q across a rough-data family
    "refine_stability": 0.25,  # relative variation across refinement levels
    "divergence": 2.0,        # growth factor per level of a divergent norm
    "space_order": 1.7,
    "time_order": 0.9,
    "exact": 1e-10,
}


# --------------------------------------------------------------------------
# data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RoughData:
    """Continuous initial data with a single point of finite smoothness.

    ``kind="interior"``: ``|x1 - x0|^beta exp(-(x1 - x0)^2)``;
    ``kind="boundary"``: ``x1^beta exp(-x1)``.  For ``m = 1`` the factor
    ``exp(-y1^2)`` is appended.  Both are divided by their exact maximum,
    so the sup-norm is 1 whenever the maximiser lies in the box.
    """

    beta: float
    kind: str = "interior"
    x0: float = 0.5
    n: int = 1
    m: int = 0

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.kind not in ("interior", "boundary"):
            raise ValueError("kind must be 'interior' or 'boundary'")
        if self.n < 1:
            raise ValueError("rough data needs a degenerate axis")

    @property
    def scale(self) -> float:
        b = self.beta
        if self.kind == "interior":
            return (b / 2) ** (b / 2) * np.exp(-b / 2)
        return b ** b * np.exp(-b)

    @property
    def modulus(self) -> str:
        """Modulus of continuity at the rough point."""
        where = f"x1 = {self.x0}" if self.kind == "interior" else "x1 = 0"
        return f"Hölder exponent {self.beta} at {where}"

    @property
    def description(self) -> str:
        return f"rough:{self.kind}:beta={self.beta!r}:x0={self.x0!r}:n={self.n}:m={self.m}"

    def __call__(self, env) -> np.ndarray:
        x = np.asarray(env["x1"], dtype=float)
        if self.kind == "interior":
            v = np.abs(x - self.x0) ** self.beta * np.exp(-(x - self.x0) ** 2)
        else:
            v = x ** self.beta * np.exp(-x)
        if self.m:
            v = v * np.exp(-np.asarray(env["y1"], dtype=float) ** 2)
        return v / self.scale


@dataclass(frozen=True)
class RoughDataFamily:
    betas: tuple = (1.0, 2 / 3, 1 / 2, 1 / 3)
    kind: str = "interior"
    x0: float = 0.5
    n: int = 1
    m: int = 0

    def members(self) -> list:
        return [RoughData(b, self.kind, self.x0, self.n, self.m) for b in self.betas]


def _as_expr(v, n, m):
    if v is None or isinstance(v, (Expr, RoughData)) or callable(v):
        return v
    if isinstance(v, (int, float)):
        return el.Num(float(v))
    return el.parse(str(v), n=n, m=m)


@dataclass(frozen=True)
class Problem:
    """Inputs of one initial-value problem on the truncated box."""

    name: str
    L: CoefficientSet
    f: object = 0.0
    g: object = None
    T: float = 1.0
    x_max: float = 4.0
    y_max: float = 1.0
    scheme: str = "implicit-euler"
    boundary: str = "buffer-extrapolation"
    drift: str = "central"
    margin: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "f", _as_expr(self.f, self.L.n, self.L.m))
        object.__setattr__(self, "g", _as_expr(self.g, self.L.n, self.L.m))

    @property
    def n(self):
        return self.L.n

    @property
    def m(self):
        return self.L.m

    def config(self, J: int, dt: float, Ny: int = 8, store_every: int = 1, **kw) -> SolveConfig:
        base = dict(n=self.n, m=self.m, J=J, x_max=self.x_max, Ny=Ny, y_max=self.y_max,
                    T=self.T, dt=dt, scheme=self.scheme, boundary=self.boundary,
                    drift=self.drift, margin=self.margin, store_every=store_every)
        base.update(kw)
        return SolveConfig(**base)

    def oracle(self, d: int = 4):
        from .oracle import polynomial_oracle
        return polynomial_oracle(self.L, self.f, self.g, self.T, d)

    def solve(self, cfg: SolveConfig, exact=None):
        return solve_ivp(self.L, self.f, self.g, cfg, exact=exact)

    def digest(self, *extra) -> str:
        def d(v):
            if isinstance(v, RoughData):
                return v.description
            return v
        return config_hash(self.name, self.L.a, self.L.atilde, self.L.b, self.L.c, self.L.d,
                           self.L.e, d(self.f), d(self.g), self.T, self.x_max, self.y_max,
                           self.scheme, self.boundary, self.drift, self.margin, *extra)


def _data_values(data, env) -> np.ndarray:
    shape = np.shape(env["x1"] if "x1" in env else next(iter(env.values())))
    if data is None:
        return np.zeros(shape)
    if isinstance(data, Expr):
        return np.broadcast_to(np.asarray(el.evaluate(data, env), dtype=float), shape)
    if callable(data):
        return np.broadcast_to(np.asarray(data(env), dtype=float), shape)
    return np.full(shape, float(data))


def _region_box(problem: Problem, margin: float | None = None):
    """Verification box: the truncated box minus its outer ``margin`` fraction."""
    mg = problem.margin if margin is None else margin
    box = [(0.0, (1 - mg) * problem.x_max)] * problem.n
    box += [(-(1 - mg) * problem.y_max, (1 - mg) * problem.y_max)] * problem.m
    return box


def _probe(field: SampledField, factor: int, t_step: int = 1) -> SampledField:
    return field.take(t_step, [factor] * (field.n + field.m))


# --------------------------------------------------------------------------
# maximum and comparison principles
# --------------------------------------------------------------------------

def _sup_data(problem: Problem, grid, times) -> tuple:
    env = grid.env()
    sf = float(np.max(np.abs(_data_values(problem.f, env))))
    sg = 0.0
    if problem.g is not None:
        for t in times:
            e = dict(env)
            e["t"] = np.full(grid.size, float(t))
            sg = max(sg, float(np.max(np.abs(_data_values(problem.g, e)))))
    return sf, sg


def max_principle_check(problem: Problem, J: int = 32, dt: float | None = None, Ny: int = 8,
                        equality_tol: float = 1e-8) -> VerifyReport:
    """``sup|u| <= sup|f| + T sup|g| + tol`` with ``tol`` from a two-grid comparison.

    ``sup|u|`` is taken over the verification region; ``sup|f|`` and
    ``sup|g|`` over the whole box.  The reported ``equality_gap`` is
    ``|sup|u| - (sup|f| + T sup|g|)|``.
    """
    t0 = time.perf_counter()
    dt = problem.T / 40 if dt is None else dt
    coarse = problem.solve(problem.config(J, dt, Ny))
    fine = problem.solve(problem.config(2 * J, dt / 4, 2 * Ny if problem.m else Ny))
    sp = [2] * problem.n + [2] * problem.m
    fine_on_coarse = fine.values[::4][(slice(None),) + tuple(slice(None, None, s) for s in sp)]
    tol = float(np.max(np.abs(fine_on_coarse - coarse.values)))
    box = _region_box(problem)
    fs = fine.sampled().restrict(box=box)
    sup_u = sup_norm(fs)
    sf, sg = _sup_data(problem, fine.grid, fine.times)
    rhs = sf + problem.T * sg
    gap = abs(sup_u - rhs)
    passed = sup_u <= rhs + tol + equality_tol
    return VerifyReport(
        "maxprin", problem.digest(J, dt, Ny),
        {"sup_u": sup_u, "sup_f": sf, "sup_g": sg, "rhs": rhs, "tol": tol,
         "slack": rhs - sup_u, "equality_gap": gap},
        bool(passed), {"two_grid": tol, "abs": equality_tol},
        time.perf_counter() - t0, notes=problem.name)


def comparison_check(problem: Problem, J: int = 32, dt: float | None = None, Ny: int = 8,
                     tol: float | None = None) -> VerifyReport:
    """Nonpositive data gives ``u <= tol`` at every node (outer faces included)."""
    t0 = time.perf_counter()
    dt = problem.T / 40 if dt is None else dt
    cfg = problem.config(J, dt, Ny)
    tol = 10 * cfg.tol if tol is None else tol
    grid = make_grid(cfg)
    env = grid.env()
    fmax = float(np.max(_data_values(problem.f, env)))
    gmax = 0.0 if problem.g is None else -np.inf
    if problem.g is not None:
        for t in grid.times:
            e = dict(env)
            e["t"] = np.full(grid.size, float(t))
            gmax = max(gmax, float(np.max(_data_values(problem.g, e))))
    if fmax > 0 or gmax > 0:
        raise ValueError("comparison check needs f <= 0 and g <= 0 on the grid")
    u = problem.solve(cfg)
    umax = float(np.max(u.values))
    return VerifyReport("comparison", problem.digest(J, dt, Ny),
                        {"max_u": umax, "max_f": fmax, "max_g": gmax},
                        bool(umax <= tol), {"tol": tol}, time.perf_counter() - t0,
                        notes=problem.name)


# --------------------------------------------------------------------------
# interpolation inequalities
# --------------------------------------------------------------------------

def interp_check(n: int, m: int, alpha: float, eps=None, members=None, constants=None,
                 grid_kw=None, pair_budget: int = DEFAULT_PAIR_BUDGET) -> VerifyReport:
    """Count violations of the twelve interpolation inequalities.

    The support-restricted ones run only on members tagged with a region
    ``I`` (and whose support is verified to lie in the closure of
    ``M''_I``).
    """
    from .interpolation import eps_grid, family_field, interp_constants, lhs_values, smooth_family

    t0 = time.perf_counter()
    eps = eps_grid() if eps is None else np.asarray(eps, dtype=float)
    C, m0 = interp_constants(n, m, alpha) if constants is None else constants
    members = smooth_family(n, m) if members is None else members
    violations, checks, worst = 0, 0, 0.0
    rows = []
    for mb in members:
        u = family_field(mb, n, m, **(grid_kw or {}))
        if mb.support is not None:
            _support_region_check(u, mb.support)
        n2 = wf_norm_2alpha(u, alpha, 0, pair_budget).total
        s = sup_norm(u)
        for key, lhs in lhs_values(u, alpha, mb.support, pair_budget).items():
            rhs = eps * n2 + C * eps ** (-m0) * s
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
            bad = int(np.sum(lhs > rhs))
            violations += bad
            checks += len(eps)
            worst = max(worst, float(ratio.max()))
            rows.append({"member": mb.name, "inequality": key, "lhs": lhs,
                         "max_lhs_over_rhs": float(ratio.max()), "violations": bad})
    rep = VerifyReport("interp", config_hash(n, m, alpha, eps, C, m0, [mb.expr for mb in members], grid_kw or {}),
                       {"violations": violations, "checks": checks, "worst_ratio": worst,
                        "C": float(C), "m0": float(m0)},
                       violations == 0, {"C": float(C), "m0": float(m0)},
                       time.perf_counter() - t0, table=rows)
    return rep


# --------------------------------------------------------------------------
# Schauder ratios
# --------------------------------------------------------------------------

def refinement_growth_ok(values: Sequence[float]) -> bool:
    """False when a sequence grows at every refinement without slowing down.

    Discrete norms are lower bounds that typically creep up under
    refinement; growth is only flagged when it is monotone *and* the
    increments do not contract.
    """
    v = list(values)
    inc = np.diff(v)
    if len(inc) < 2 or not np.all(inc > 0):
        return True
    return bool(np.all(inc[1:] < inc[:-1]))


def _residual_field(L: CoefficientSet, u: SampledField) -> SampledField:
    Lu = lu_field(L, u)
    n = u.n + u.m
    return u.with_values(u.slot(1, [0] * n) - Lu.values)


def _levels(J0: int, count: int):
    return [J0 * 2 ** i for i in range(count)]


def _level_solve(problem: Problem, J0: int, dt0: float, level: int, Ny0: int, store0: int,
                 exact=None):
    f = 2 ** level
    cfg = problem.config(J0 * f, dt0 / f ** 2, Ny0 * f if problem.m else Ny0,
                         store_every=store0 * f ** 2)
    return problem.solve(cfg, exact=exact), f


def _local_Q(problem, u: SampledField, T0, r, z0, alpha, k, pair_budget):
    num_f = u.restrict(t_range=(T0, problem.T), ball=(z0, r))
    den_f = u.restrict(t_range=(T0 / 2, problem.T), ball=(z0, 2 * r))
    num = wf_norm_2alpha(num_f, alpha, k, pair_budget).total
    res = wf_norm_alpha(_residual_field(problem.L, den_f), alpha, k, pair_budget).total
    sup = sup_norm(den_f)
    den = res + sup
    return num, res, sup, den


def schauder_ratio_local(problems: Sequence[Problem], T0: float, r: float, z0, alpha: float,
                         k: int = 0, J0: int = 16, dt0: float | None = None, Ny0: int = 4,
                         levels: int = 3, store0: int = 2, thresholds=None,
                         pair_budget: int = DEFAULT_PAIR_BUDGET) -> VerifyReport:
    """Interior-in-time estimate: ``Q = ||u||_{k,2+alpha}([T0,T] x B_r)``
    over ``||u_t - L u||_{k,alpha}([T0/2,T] x B_2r) + ||u||_C([T0/2,T] x B_2r)``.

    Each problem is solved on ``levels`` grids (``J`` doubling, ``dt``
    quartering) and ``Q`` is evaluated on the probe nodes of the coarsest
    grid.  Passes when the finest-level ``Q`` varies by at most
    ``family_ratio`` across the family and no member's ``Q`` grows without
    slowing down under refinement.  Members with ``u = 0`` are reported as
    not applicable and excluded.
    """
    th = dict(THRESHOLDS, **(thresholds or {}))
    t0 = time.perf_counter()
    z0 = np.asarray(z0, dtype=float)
    rows, finals, growth_ok = [], [], True
    for p in problems:
        dt = p.T / 50 if dt0 is None else dt0
        qs = []
        for lv in range(levels):
            sol, f = _level_solve(p, J0, dt, lv, Ny0, store0)
            u = _probe(estimate_derivatives(sol), f)
            num, res, sup, den = _local_Q(p, u, T0, r, z0, alpha, k, pair_budget)
            q = num / den if den > 0 else float("nan")
            qs.append(q)
            rows.append({"problem": p.name, "level": lv, "J": J0 * f, "numerator": num,
                         "residual_norm": res, "sup": sup, "Q": q})
        if np.all(np.isnan(qs)):
            continue
        finals.append(qs[-1])
        growth_ok &= refinement_growth_ok(qs)
    if not finals:
        return VerifyReport("local", config_hash([p.digest() for p in problems], T0, r, z0.tolist()),
                            {}, True, {}, time.perf_counter() - t0, applicable=False, table=rows)
    spread = max(finals) / min(finals)
    passed = spread <= th["family_ratio"] and growth_ok
    return VerifyReport(
        "local", config_hash([p.digest() for p in problems], T0, r, z0.tolist(), alpha, k, J0, levels),
        {"Q_max": max(finals), "Q_min": min(finals), "family_ratio": spread,
         "growth_ok": float(growth_ok)},
        bool(passed), {"family_ratio": th["family_ratio"]}, time.perf_counter() - t0, table=rows)


def _data_norms(problem: Problem, u: SampledField, alpha, k, pair_budget):
    """``||g||_{k,alpha}`` and ``||f||_{k,2+alpha}`` on the nodes of ``u``."""
    g = problem.g
    if g is None:
        gn = 0.0
    elif isinstance(g, Expr):
        gn = wf_norm_alpha(SampledField.from_expr(g, u.times, u.axes, u.n, u.m, mask=u.mask),
                           alpha, k, pair_budget).total
    else:
        raise TypeError("g must be an expression")
    f = problem.f
    if not isinstance(f, Expr):
        raise TypeError("f must be an expression with analytic derivatives")
    mask = None if u.mask is None else u.mask[:1]
    fn = wf_norm_2alpha(SampledField.from_expr(f, u.times[:1], u.axes, u.n, u.m, mask=mask),
                        alpha, k, pair_budget).total
    return gn, fn


def schauder_ratio_global(problem: Problem, alpha: float, k: int = 0, J0: int = 16,
                          dt0: float | None = None, Ny0: int = 4, levels: int = 3,
                          store0: int = 2, exact=None, thresholds=None,
                          pair_budget: int = DEFAULT_PAIR_BUDGET) -> VerifyReport:
    """``||u||_{k,2+alpha}([0,T] x box) / (||g||_{k,alpha} + ||f||_{k,2+alpha})``
    across refinement levels; passes when ``max/min - 1 <= refine_stability``."""
    th = dict(THRESHOLDS, **(thresholds or {}))
    t0 = time.perf_counter()
    dt = problem.T / 50 if dt0 is None else dt0
    box = _region_box(problem)
    rows, ratios = [], []
    for lv in range(levels):
        sol, f = _level_solve(problem, J0, dt, lv, Ny0, store0, exact=exact)
        u = _probe(estimate_derivatives(sol), f).restrict(box=box)
        un = wf_norm_2alpha(u, alpha, k, pair_budget).total
        gn, fn = _data_norms(problem, u, alpha, k, pair_budget)
        R = un / (gn + fn) if gn + fn > 0 else float("nan")
        ratios.append(R)
        rows.append({"level": lv, "J": J0 * f, "u_norm": un, "g_norm": gn, "f_norm": fn, "ratio": R})
    h = problem.digest(alpha, k, J0, dt, Ny0, levels)
    if np.all(np.isnan(ratios)):
        return VerifyReport("global", h, {}, True, {}, time.perf_counter() - t0,
                            applicable=False, table=rows)
    var = max(ratios) / min(ratios) - 1.0
    return VerifyReport("global", h, {"ratio_min": min(ratios), "ratio_max": max(ratios),
                                      "variation": var},
                        bool(var <= th["refine_stability"]),
                        {"refine_stability": th["refine_stability"]}, time.perf_counter() - t0,
                        table=rows)


def smoothing_check(problem: Problem, T0: float, alpha: float, k: int = 0, J0: int = 16,
                    dt0: float | None = None, Ny0: int = 4, levels: int = 3, store0: int = 2,
                    expect_divergence: bool | None = None, thresholds=None,
                    pair_budget: int = DEFAULT_PAIR_BUDGET) -> VerifyReport:
    """Smoothing of continuous data, measured on each level's own grid.

    (i) ``||u||_{k,2+alpha}([T0,T] x box)`` changes by at most
    ``refine_stability`` between successive levels, and the ratio
    ``C = norm / (||g||_{k,alpha} + sup|f|)`` is recorded;
    (ii) the same norm of the data interpolant on ``[0, T0/4]`` grows by
    at least ``divergence`` per level (rough data), or is stable like (i)
    (smooth control data).
    """
    th = dict(THRESHOLDS, **(thresholds or {}))
    t0 = time.perf_counter()
    if expect_divergence is None:
        expect_divergence = isinstance(problem.f, RoughData) and problem.f.beta < 1
    dt = problem.T / 50 if dt0 is None else dt0
    box = _region_box(problem)
    rows, late, early = [], [], []
    for lv in range(levels):
        sol, f = _level_solve(problem, J0, dt, lv, Ny0, store0)
        u = estimate_derivatives(sol).restrict(t_range=(T0, problem.T), box=box)
        late.append(wf_norm_2alpha(u, alpha, k, pair_budget).total)
        # raw data, constant in time on [0, T0/4]
        grid = sol.grid
        fvals = _data_values(problem.f, grid.env()).reshape(grid.shape)
        times = sol.times[sol.times <= T0 / 4 + 1e-12]
        if len(times) < 2:
            times = np.array([0.0, T0 / 4])
        vals = np.broadcast_to(fvals, (len(times), *grid.shape))
        from .solver import SpaceTimeField
        raw = SpaceTimeField(grid, times, np.array(vals), rates=np.zeros((len(times), *grid.shape)))
        d = estimate_derivatives(raw).restrict(box=box)
        early.append(wf_norm_2alpha(d, alpha, k, pair_budget).total)
        rows.append({"level": lv, "J": J0 * f, "late_norm": late[-1], "early_norm": early[-1]})
    sol_grid = make_grid(problem.config(J0, dt, Ny0))
    sup_f = float(np.max(np.abs(_data_values(problem.f, sol_grid.env()))))
    g = problem.g
    gn = 0.0
    if isinstance(g, Expr):
        gf = SampledField.from_expr(g, np.linspace(0, problem.T, 5), sol_grid.axes,
                                    problem.n, problem.m).restrict(box=box)
        gn = wf_norm_alpha(gf, alpha, k, pair_budget).total
    late_var = max(abs(late[i + 1] / late[i] - 1) for i in range(levels - 1))
    growth = [early[i + 1] / early[i] for i in range(levels - 1)]
    stable_i = late_var <= th["refine_stability"]
    if expect_divergence:
        ok_ii = min(growth) >= th["divergence"]
    else:
        ok_ii = max(abs(g_ - 1) for g_ in growth) <= th["refine_stability"]
    C = late[-1] / (gn + sup_f) if gn + sup_f > 0 else float("nan")
    if gn + sup_f == 0 and late[-1] == 0:
        return VerifyReport("smoothing", problem.digest(T0, alpha, k, J0, dt, levels),
                            {"late_norm": 0.0}, True, {}, time.perf_counter() - t0,
                            applicable=True, notes="trivial data", table=rows)
    return VerifyReport(
        "smoothing", problem.digest(T0, alpha, k, J0, dt, Ny0, levels),
        {"late_variation": late_var, "early_growth_min": min(growth),
         "early_growth_max": max(growth), "C": C, "late_norm": late[-1]},
        bool(stable_i and ok_ii),
        {"refine_stability": th["refine_stability"], "divergence": th["divergence"],
         "expect_divergence": float(expect_divergence)},
        time.perf_counter() - t0, table=rows)


# --------------------------------------------------------------------------
# oracle comparison
# --------------------------------------------------------------------------

def _errors(sol, oracle):
    g = sol.grid
    env = g.env()
    e = sol.values[-1].reshape(-1) - oracle(sol.times[-1], env)
    return float(np.max(np.abs(e))), float(np.sqrt(np.mean(e ** 2)))


def oracle_compare(problem: Problem, mode: str = "space", J0: int = 16, levels: int = 3,
                   dt0: float | None = None, Ny0: int = 8, J_time: int = 256,
                   d: int = 4, thresholds=None) -> VerifyReport:
    """Errors against the polynomial oracle over refinement levels.

    ``mode="space"`` doubles ``J`` (and ``Ny``) with ``dt`` proportional to
    the squared sqrt(x)-spacing, so the error should fall at order 2 in
    that spacing; ``mode="time"`` halves ``dt`` on a fixed fine grid (order
    1 for implicit Euler).  The outer faces are pinned to the oracle.
    When every level is exact to ``THRESHOLDS['exact']`` the problem is
    reported as exactly reproduced.
    """
    th = dict(THRESHOLDS, **(thresholds or {}))
    t0 = time.perf_counter()
    orc = problem.oracle(d)
    p = replace(problem, boundary="oracle-Dirichlet")
    rows = []
    for lv in range(levels):
        if mode == "space":
            J = J0 * 2 ** lv
            dt = (problem.T / 16 if dt0 is None else dt0) / 4 ** lv
            Ny = Ny0 * 2 ** lv
        elif mode == "time":
            J, Ny = J_time, max(Ny0, J_time // 4)
            dt = (problem.T / 10 if dt0 is None else dt0) / 2 ** lv
        else:
            raise ValueError("mode must be 'space' or 'time'")
        sol = p.solve(p.config(J, dt, Ny, store_every=10 ** 9), exact=orc)
        emax, el2 = _errors(sol, orc)
        rows.append({"level": lv, "J": J, "Ny": Ny if problem.m else 0, "dt": dt,
                     "max_error": emax, "l2_error": el2})
    errs = [r["max_error"] for r in rows]
    exact = max(errs) <= th["exact"]
    base = 2.0
    orders = [float(np.log(errs[i] / errs[i + 1]) / np.log(base)) if errs[i + 1] > 0 else float("inf")
              for i in range(levels - 1)]
    for r, o in zip(rows[1:], orders):
        r["order"] = o
    need = th["space_order"] if mode == "space" else th["time_order"]
    passed = exact or min(orders) >= need
    return VerifyReport(
        f"oracle-{mode}", p.digest(mode, J0, levels, dt0, Ny0, J_time, d),
        {"max_error_finest": errs[-1], "order_min": min(orders), "exact": float(exact)},
        bool(passed), {"order": need, "exact": th["exact"]}, time.perf_counter() - t0,
        notes=problem.name, table=rows)
