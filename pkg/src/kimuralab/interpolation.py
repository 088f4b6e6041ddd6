"""Interpolation inequalities for the WF Hölder spaces, checked on a grid.

Every inequality has the shape

    LHS(u) <= eps ||u||_{C^{2+alpha}_WF} + C eps^{-m0} ||u||_C,    0 < eps < 1.

The twelve left-hand sides are listed in :data:`INEQUALITIES`.  The last
eight need ``u`` to be supported in the closure of ``M''_I`` for the
region ``I`` they refer to, except ``sup_uyy`` and ``holder_uy`` which
hold without it.

The constants ``(C, m0)`` (and ``(C, m_k)`` for the ``L u`` estimate) only
exist in the continuum statement; :func:`calibrate` finds them by brute
force on the documented smooth family and the result is frozen in
``data/constants.json``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import numpy as np

from . import exprlang as el
from .exprlang import Expr
from .geometry import RegionIndex
from .holder import (SampledField, _seminorm, sup_norm, wf_norm_2alpha, DEFAULT_PAIR_BUDGET)

__all__ = [
    "Inequality", "INEQUALITIES", "FamilyMember", "smooth_family", "family_field",
    "eps_grid", "lhs_values", "calibrate", "calibrate_lemma", "interp_constants",
    "lemma_constants", "load_constants", "write_constants", "reference_operator",
    "M0_CANDIDATES", "SAFETY",
]

M0_CANDIDATES = (0.5, 1.0, 1.5, 2.0, 3.0)
SAFETY = 1.5


def eps_grid(count: int = 20, lo: float = 1e-3, hi: float = 0.99) -> np.ndarray:
    """Log-spaced ``eps`` values in ``[lo, hi]`` (``hi < 1``)."""
    return np.logspace(math.log10(lo), math.log10(hi), count)


# --------------------------------------------------------------------------
# the inequalities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Inequality:
    key: str
    description: str
    needs_support: bool


INEQUALITIES = (
    Inequality("holder_u", "||u||_{C^alpha_WF}", False),
    Inequality("sup_ux", "sup |u_{x_i}|", False),
    Inequality("sup_uy", "sup |u_{y_l}|", False),
    Inequality("sup_ut", "sup |u_t|", False),
    Inequality("sup_sqrt_xx_uxx", "sup |sqrt(x_i x_j) u_{x_i x_j}|, i, j in I", True),
    Inequality("sup_sqrt_x_uxx", "sup |sqrt(x_i) u_{x_i x_j}|, i in I, j not in I", True),
    Inequality("sup_sqrt_x_uxy", "sup |sqrt(x_i) u_{x_i y_l}|, i in I", True),
    Inequality("sup_uxx_far", "sup |u_{x_i x_j}|, i, j not in I", True),
    Inequality("sup_uyy", "sup |u_{y_l y_p}|", False),
    Inequality("holder_x_ux", "||x_i u_{x_i}||_{C^alpha_WF}, i in I", True),
    Inequality("holder_ux_far", "||u_{x_j}||_{C^alpha_WF}, j not in I", True),
    Inequality("holder_uy", "||u_{y_l}||_{C^alpha_WF}", False),
)


def _z(d, *axes_):
    z = [0] * d
    for a in axes_:
        z[a] += 1
    return z


def lhs_values(u: SampledField, alpha, region: Optional[RegionIndex],
               pair_budget: int = DEFAULT_PAIR_BUDGET) -> dict:
    """Left-hand side of every inequality that applies to ``u``.

    Support-restricted inequalities are evaluated only when ``region`` is
    given; a sum over the index pairs it names is reported (0 when the
    index set is empty).
    """
    n, m = u.n, u.m
    d = n + m
    mask = u.flat_mask()
    mesh = np.meshgrid(u.times, *u.axes, indexing="ij")
    xs = mesh[1:1 + n]

    def sup(v):
        return float(np.max(np.abs(v.ravel()[mask]))) if v.size else 0.0

    def hol(v):
        return sup(v) + _seminorm(u, v, mask, alpha, pair_budget)[0]

    sl = lambda *a: u.slot(0, _z(d, *a))  # noqa: E731
    out = {
        "holder_u": hol(u.values),
        "sup_ux": sum(sup(sl(i)) for i in range(n)),
        "sup_uy": sum(sup(sl(n + l)) for l in range(m)),
        "sup_ut": sup(u.slot(1, [0] * d)),
        "sup_uyy": sum(sup(sl(n + k, n + l)) for k in range(m) for l in range(m)),
        "holder_uy": sum(hol(sl(n + l)) for l in range(m)),
    }
    if region is not None:
        I = [i for i in range(n) if i + 1 in region]
        Ic = [i for i in range(n) if i + 1 not in region]
        out.update({
            "sup_sqrt_xx_uxx": sum(sup(np.sqrt(xs[i] * xs[j]) * sl(i, j)) for i in I for j in I),
            "sup_sqrt_x_uxx": sum(sup(np.sqrt(xs[i]) * sl(i, j)) for i in I for j in Ic),
            "sup_sqrt_x_uxy": sum(sup(np.sqrt(xs[i]) * sl(i, n + l)) for i in I for l in range(m)),
            "sup_uxx_far": sum(sup(sl(i, j)) for i in Ic for j in Ic),
            "holder_x_ux": sum(hol(xs[i] * sl(i)) for i in I),
            "holder_ux_far": sum(hol(sl(j)) for j in Ic),
        })
    return out


# --------------------------------------------------------------------------
# the documented smooth family
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyMember:
    name: str
    expr: str
    support: Optional[RegionIndex]  # region I with supp u in closure of M''_I, or None


_X_FAMILY = (
    # (name, x/t part, support tag)
    ("bump-near", "exp(-(x1-0.5)^2/0.0625)", frozenset({1})),
    ("bump-near-decay", "exp(-t)*(1+x1)*exp(-(x1-0.6)^2/0.0625)", frozenset({1})),
    ("edge-bump", "x1*exp(-(x1-0.4)^2/0.0625)", frozenset({1})),
    ("bump-mid", "cos(t)*exp(-(x1-1)^2/0.0324)", frozenset({1})),
    ("bump-far", "exp(-(x1-2.5)^2/0.09)", frozenset()),
    ("bump-far-growth", "(1+t)*exp(-(x1-3)^2/0.16)", frozenset()),
    ("boundary-wave", "exp(-x1)*(1+sin(2*x1))*exp(-t)", None),
    ("boundary-poly", "x1^2*exp(-x1)*(2-t)", None),
)

_Y_FACTORS = (
    "exp(-y1^2/0.25)", "cos(y1)", "(1+y1^2/2)", "exp(-(y1-0.2)^2)",
    "cos(2*y1)", "exp(-y1^2)", "(2+sin(y1))", "(1+y1)",
)


def smooth_family(n: int, m: int) -> list:
    """The eight-member family for ``(n, m)`` in ``{(1, 0), (1, 1)}``."""
    if n != 1 or m not in (0, 1):
        raise ValueError("the documented family covers n = 1, m in {0, 1}")
    out = []
    for (name, e, tag), yf in zip(_X_FAMILY, _Y_FACTORS):
        expr = e if m == 0 else f"({e})*{yf}"
        out.append(FamilyMember(name, expr, tag))
    return out


def family_field(member: FamilyMember, n: int, m: int, J: int = 32, Ny: int = 12, nt: int = 9,
                 x_max: float = 4.0, y_max: float = 1.0, T: float = 1.0) -> SampledField:
    """Sample a member on ``[0, T] x [0, x_max] x [-y_max, y_max]`` (graded in ``sqrt(x)``)."""
    j = np.arange(J + 1) / J
    axes = [x_max * j ** 2] * n + [np.linspace(-y_max, y_max, Ny + 1)] * m
    times = np.linspace(0.0, T, nt)
    return SampledField.from_expr(el.parse(member.expr, n=n, m=m), times, axes, n, m)


# --------------------------------------------------------------------------
# calibration
# --------------------------------------------------------------------------

def _required_C(lhs: float, eps: np.ndarray, n2: float, s: float, m0: float) -> float:
    denom = eps ** (-m0) * s
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.where(denom > 0, (lhs - eps * n2) / denom, np.where(lhs > eps * n2, np.inf, 0.0))
    return float(max(0.0, np.max(need)))


def _measure_family(n, m, alpha, grid_kw, pair_budget):
    rows = []
    for mb in smooth_family(n, m):
        u = family_field(mb, n, m, **grid_kw)
        n2 = wf_norm_2alpha(u, alpha, 0, pair_budget).total
        rows.append((mb, lhs_values(u, alpha, mb.support, pair_budget), n2, sup_norm(u)))
    return rows


def _round_up(v: float, digits: int = 2) -> float:
    if v <= 0:
        return 0.0
    e = math.floor(math.log10(v)) - digits + 1
    return math.ceil(v / 10 ** e) * 10 ** e


def calibrate(n: int, m: int, alpha: float, eps=None, grid_kw=None,
              pair_budget: int = DEFAULT_PAIR_BUDGET, safety: float = SAFETY) -> dict:
    """Smallest ``C`` per candidate ``m0`` over family x inequalities x eps.

    The chosen ``m0`` minimises the bound at the smallest ``eps``; the
    frozen ``C`` is the required value times ``safety``, rounded up to two
    significant digits.
    """
    eps = eps_grid() if eps is None else np.asarray(eps, dtype=float)
    rows = _measure_family(n, m, alpha, grid_kw or {}, pair_budget)
    best = None
    per_m0 = {}
    for m0 in M0_CANDIDATES:
        C = max(_required_C(v, eps, n2, s, m0) for _, lhs, n2, s in rows for v in lhs.values())
        per_m0[m0] = C
        score = C * eps.min() ** (-m0)
        if best is None or score < best[0]:
            best = (score, m0, C)
    _, m0, C = best
    return {"C": _round_up(max(C, 1e-3) * safety), "m0": m0, "C_required": C,
            "per_m0": {str(k): v for k, v in per_m0.items()}}


def reference_operator(n: int, m: int):
    """Constant-coefficient operator used to calibrate the ``L u`` estimate."""
    from .operator import CoefficientSet
    coeffs = {"a1": 1.0, "b1": 0.5, "atilde11": 0.1}
    if m:
        coeffs.update({"c11": 0.2, "d11": 1.0, "e1": 0.1})
    return CoefficientSet.from_mapping(n, m, coeffs)


def calibrate_lemma(n: int, m: int, alpha: float, k: int = 0, eps=None, grid_kw=None,
                    pair_budget: int = DEFAULT_PAIR_BUDGET, safety: float = SAFETY) -> dict:
    """Calibrate ``(C, m_k)`` of the ``L u`` estimate on the supported family members."""
    from .holder import check_lemma_Lu_bound

    eps = eps_grid() if eps is None else np.asarray(eps, dtype=float)
    L = reference_operator(n, m)
    members = [mb for mb in smooth_family(n, m) if mb.support is not None]
    best = None
    per = {}
    for m0 in M0_CANDIDATES:
        C = 0.0
        for mb in members:
            u = family_field(mb, n, m, **(grid_kw or {}))
            rep = check_lemma_Lu_bound(L, u, mb.support, alpha, eps, k=k,
                                       constants=(np.inf, m0), pair_budget=pair_budget)
            C = max(C, rep.measured["C_needed"])
        per[m0] = C
        score = C * eps.min() ** (-m0)
        if best is None or score < best[0]:
            best = (score, m0, C)
    _, m0, C = best
    return {"C": _round_up(max(C, 1e-3) * safety), "m_k": m0, "C_required": C,
            "per_m0": {str(k_): v for k_, v in per.items()}}


# --------------------------------------------------------------------------
# frozen table
# --------------------------------------------------------------------------

def _key(n, m, alpha, k=None) -> str:
    s = f"n={n},m={m},alpha={float(alpha)!r}"
    return s if k is None else s + f",k={k}"


def load_constants(path=None) -> dict:
    if path is None:
        text = resources.files("kimuralab").joinpath("data/constants.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def interp_constants(n: int, m: int, alpha: float, table: dict | None = None) -> tuple:
    table = load_constants() if table is None else table
    try:
        row = table["interpolation"][_key(n, m, alpha)]
    except KeyError:
        raise KeyError(f"no calibrated interpolation constants for {_key(n, m, alpha)}") from None
    return row["C"], row["m0"]


def lemma_constants(n: int, m: int, alpha: float, k: int = 0, table: dict | None = None) -> tuple:
    table = load_constants() if table is None else table
    try:
        row = table["lemma_Lu"][_key(n, m, alpha, k)]
    except KeyError:
        raise KeyError(f"no calibrated L u constants for {_key(n, m, alpha, k)}") from None
    return row["C"], row["m_k"]


def write_constants(path, configs=((1, 0, 0.5), (1, 1, 0.5), (1, 0, 0.25), (1, 0, 0.75)), ks=(0,),
                    grid_kw=None) -> dict:
    """Run every calibration and write the frozen table to ``path``."""
    grid_kw = grid_kw or {}
    table = {
        "note": "calibrated by brute force on the documented smooth family; "
                f"safety factor {SAFETY}, m0 candidates {list(M0_CANDIDATES)}",
        "grid": {"J": grid_kw.get("J", 32), "Ny": grid_kw.get("Ny", 12), "nt": grid_kw.get("nt", 9),
                 "x_max": 4.0, "y_max": 1.0, "T": 1.0},
        "eps_grid": [float(e) for e in eps_grid()],
        "interpolation": {}, "lemma_Lu": {},
    }
    for n, m, a in configs:
        table["interpolation"][_key(n, m, a)] = calibrate(n, m, a, grid_kw=grid_kw)
        for k in ks:
            table["lemma_Lu"][_key(n, m, a, k)] = calibrate_lemma(n, m, a, k, grid_kw=grid_kw)
    with open(path, "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return table
