"""Acceptance suite.

Each criterion prints one ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line (visible under ``pytest -v`` as well as when the file is run as a
script) and then asserts the outcome.  Problem sets, grids and tolerances
are fixed here so runs are reproducible.
"""
import sys

import numpy as np
import pytest

from kimuralab import exprlang as el
from kimuralab.cutoff import build_cutoff_sequence, build_partition, cutoff_growth
from kimuralab.geometry import Point, SpatialPoint, rho
from kimuralab.holder import SampledField, wf_norm_2alpha, wf_seminorm
from kimuralab.operator import CoefficientSet
from kimuralab.verify import (THRESHOLDS, Problem, RoughData, RoughDataFamily, comparison_check,
                              interp_check, max_principle_check, oracle_compare,
                              schauder_ratio_global, schauder_ratio_local, smoothing_check)

SEED = 20240611
ALPHA = 0.5


def _op(n, m, **c):
    return CoefficientSet.from_mapping(n, m, c)


L1 = _op(1, 0, a1="1", b1="0.5")
L11 = _op(1, 1, a1="1", b1="0.5", d11="1")


def report(n: int, ok: bool, text: str, capsys=None) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


# --------------------------------------------------------------------------
# 1. oracle equivalence
# --------------------------------------------------------------------------

ORACLE_PROBLEMS = [
    # name, operator, f, g, linear (exactness expected)
    ("P1", L1, "x1", None, True),
    ("P2", L1, "x1^2", None, False),
    ("P3", _op(1, 0, a1="1", b1="0.5", atilde11="0.1"), "x1^3 - x1", "t", False),
    ("P4", _op(1, 0, a1="0.5", b1="0.3"), "x1^4/10", None, False),
    ("P5", L11, "x1*y1 + y1^2", None, False),
    ("P6", _op(1, 1, a1="1", b1="0.5", d11="1", c11="0.2", e1="0.1"), "x1^2*y1^2", "x1", False),
    ("P7", L11, "x1 + y1", None, True),
]


def criterion_1():
    rows, ok = [], True
    for name, L, f, g, linear in ORACLE_PROBLEMS:
        p = Problem(name, L, f, g, T=1.0)
        sp, tm = oracle_compare(p, "space"), oracle_compare(p, "time")
        exact = sp.measured["exact"] and tm.measured["exact"]
        good = sp.passed and tm.passed and (exact or not linear)
        if linear:
            err = max(sp.measured["max_error_finest"], tm.measured["max_error_finest"])
            rows.append(f"{name} err={err:.1e}")
        elif exact:
            rows.append(f"{name} exact")
        else:
            rows.append(f"{name} p_x={sp.measured['order_min']:.2f} p_t={tm.measured['order_min']:.2f}")
        ok &= bool(good)
    ok &= len(ORACLE_PROBLEMS) >= 5
    return ok, (f"{len(ORACLE_PROBLEMS)} problems, need space order >= {THRESHOLDS['space_order']}, "
                f"time order >= {THRESHOLDS['time_order']}, linear exact <= {THRESHOLDS['exact']:g}; "
                + "; ".join(rows))


# --------------------------------------------------------------------------
# 2. maximum principle
# --------------------------------------------------------------------------

def _maxprin_battery():
    L2 = _op(1, 1, a1="1", b1="0.5", d11="1", c11="0.2")
    Lv = _op(1, 0, a1="1 + 0.5*exp(-x1)", b1="0.5")
    return [
        Problem("zero-f", L1, "0", "-1"), Problem("const", L1, "2"),
        Problem("bump-poly", L1, "x1*(2 - x1)"), Problem("gauss", L1, "exp(-(x1 - 1)^2)"),
        Problem("sin", L1, "sin(x1)*exp(-x1)", "0.5*cos(t)"),
        Problem("xexp", L1, "x1*exp(-x1)", "-exp(-x1)"),
        Problem("rough-boundary", L1, RoughData(0.5, "boundary")),
        Problem("rough-interior", L1, RoughData(1 / 3)),
        Problem("m1-a", L2, "exp(-x1 - y1^2)"),
        Problem("m1-b", L2, "x1*exp(-x1)*cos(y1)", "-0.5"),
        Problem("var-a", Lv, "exp(-x1)"),
        Problem("cn", L1, "1", "-1", scheme="crank-nicolson"),
    ]


def criterion_2():
    battery = _maxprin_battery()
    reps = [max_principle_check(p) for p in battery]
    ok = len(reps) == 12 and all(r.passed for r in reps)
    eq = reps[0]
    eq_ok = eq.measured["equality_gap"] <= 1e-8 + eq.measured["tol"]
    ok &= bool(eq_ok)
    worst = min(r.measured["slack"] + r.measured["tol"] for r in reps)
    failed = [r.notes for r in reps if not r.passed]
    return ok, (f"{sum(r.passed for r in reps)}/{len(reps)} problems satisfy sup|u| <= sup|f| + T sup|g| + tol, "
                f"min margin {worst:.2e}; equality case gap {eq.measured['equality_gap']:.1e} "
                f"(allowed 1e-8 + {eq.measured['tol']:.1e})" + (f"; failed {failed}" if failed else ""))


# --------------------------------------------------------------------------
# 3. comparison principle
# --------------------------------------------------------------------------

def criterion_3():
    Lv = _op(1, 0, a1="1 + 0.5*exp(-x1)", b1="0.2 + 0.1*x1", atilde11="0.1")
    battery = [
        Problem("neg-quad", L1, "-x1^2"),
        Problem("zero", L1, "0", "0"),
        Problem("neg-xexp", L1, "-x1*exp(-x1)", "-1"),
        Problem("m1", L11, "-exp(-x1 - y1^2)", "-x1"),
        Problem("var", Lv, "-(x1*(4 - x1))", "-0.1*t"),
        Problem("cn", L1, "-exp(-x1)", "-1", scheme="crank-nicolson"),
    ]
    reps = [comparison_check(p) for p in battery]
    ok = len(reps) == 6 and all(r.passed for r in reps)
    worst = max(r.measured["max_u"] for r in reps)
    return ok, f"{sum(r.passed for r in reps)}/6 nonpositive-data problems have u <= tol; max u = {worst:.2e}"


# --------------------------------------------------------------------------
# 4. interpolation inequalities
# --------------------------------------------------------------------------

INTERP_CONFIGS = [(1, 0, 0.5), (1, 1, 0.5), (1, 0, 0.25), (1, 0, 0.75)]


def criterion_4():
    parts, ok = [], True
    for n, m, a in INTERP_CONFIGS:
        r = interp_check(n, m, a)
        ok &= r.passed and r.measured["violations"] == 0
        parts.append(f"(n={n},m={m},alpha={a}) C={r.measured['C']:g} m0={r.measured['m0']:g} "
                     f"violations {r.measured['violations']}/{r.measured['checks']} "
                     f"worst lhs/rhs {r.measured['worst_ratio']:.2f}")
    return ok, "; ".join(parts)


# --------------------------------------------------------------------------
# 5. local Schauder boundedness
# --------------------------------------------------------------------------

def criterion_5():
    fam = [Problem(f"beta={mb.beta:.3g}", L1, mb, T=0.5) for mb in RoughDataFamily().members()]
    r = schauder_ratio_local(fam, T0=0.2, r=0.5, z0=[0.5], alpha=ALPHA, J0=16, levels=3)
    ok = r.passed and r.applicable
    qs = {}
    for row in r.table:
        qs.setdefault(row["problem"], []).append(row["Q"])
    seq = "; ".join(f"{k} Q={', '.join(f'{v:.3f}' for v in vs)}" for k, vs in qs.items())
    return ok, (f"family ratio {r.measured.get('family_ratio', float('nan')):.3f} "
                f"(<= {THRESHOLDS['family_ratio']:g}), growth ok={bool(r.measured.get('growth_ok'))}; {seq}")


# --------------------------------------------------------------------------
# 6. global estimate
# --------------------------------------------------------------------------

def criterion_6():
    battery = [
        Problem("poly", L1, "x1^2", None, T=0.5),
        Problem("bump", L1, "exp(-(x1 - 1)^2)", "0.5*exp(-x1)", T=0.5),
        Problem("poly-g", L1, "x1*(2 - x1)", "t", T=0.5),
        Problem("m1", L11, "exp(-x1 - y1^2)", None, T=0.5),
    ]
    parts, ok = [], True
    for p in battery:
        r = schauder_ratio_global(p, ALPHA)
        ok &= r.passed and r.applicable
        parts.append(f"{p.name} variation {r.measured['variation']:.3f}")
    return ok, f"ratio variation across 3 levels <= {THRESHOLDS['refine_stability']:g}: " + ", ".join(parts)


# --------------------------------------------------------------------------
# 7. smoothing
# --------------------------------------------------------------------------

def criterion_7():
    rough = smoothing_check(Problem("rough", L1, RoughData(0.5), T=0.5), T0=0.2, alpha=ALPHA)
    control = smoothing_check(Problem("smooth", L1, "x1*(2 - x1)", T=0.5), T0=0.2, alpha=ALPHA)
    ok = rough.passed and control.passed
    return ok, (f"beta=1/2: late variation {rough.measured['late_variation']:.3f} "
                f"(<= {THRESHOLDS['refine_stability']:g}), early growth per level "
                f"{rough.measured['early_growth_min']:.2f}..{rough.measured['early_growth_max']:.2f} "
                f"(>= {THRESHOLDS['divergence']:g}); smooth control late variation "
                f"{control.measured['late_variation']:.3f}, early growth "
                f"{control.measured['early_growth_min']:.3f}..{control.measured['early_growth_max']:.3f}")


# --------------------------------------------------------------------------
# 8. norm and metric properties
# --------------------------------------------------------------------------

def _random_field(rng, n, m, J=12):
    """Smooth random combination of bumps and polynomials on a sqrt-graded grid."""
    x = np.linspace(0, 2, J + 1) ** 2 / 2
    axes = [x] * n + [np.linspace(-1, 1, 9)] * m
    terms = []
    for _ in range(3):
        c = rng.uniform(-1, 1)
        x0 = rng.uniform(0, 2)
        terms.append(f"({c:.6f})*exp(-(x1 - ({x0:.6f}))^2)")
    if m:
        terms.append(f"({rng.uniform(-1, 1):.6f})*x1*y1")
    terms.append(f"({rng.uniform(-1, 1):.6f})*x1^2")
    e = el.parse(" + ".join(terms))
    return SampledField.from_expr(e, np.linspace(0, 0.5, 3), axes, n, m), e


def _random_point(rng, n, m, x_hi=3.0):
    return Point(float(rng.uniform(0, 1)), SpatialPoint(tuple(rng.uniform(0, x_hi, n)),
                                                        tuple(rng.uniform(-1, 1, m))))


def criterion_8():
    rng = np.random.default_rng(SEED)
    tally = {}

    def mark(name, ok):
        a, b = tally.get(name, (0, 0))
        tally[name] = (a + bool(ok), b + 1)

    for trial in range(12):
        n, m = (1, 0) if trial % 2 == 0 else (1, 1)
        u, eu = _random_field(rng, n, m)
        v, ev = _random_field(rng, n, m)
        c = float(rng.uniform(-3, 3))
        nu = wf_norm_2alpha(u, ALPHA).total
        nv = wf_norm_2alpha(v, ALPHA).total
        cu = SampledField.from_expr(el.mul(el.Num(c), eu), u.times, u.axes, n, m)
        uv = SampledField.from_expr(el.add(eu, ev), u.times, u.axes, n, m)
        mark("homogeneity", abs(wf_norm_2alpha(cu, ALPHA).total - abs(c) * nu) <= 1e-9 * (1 + abs(c) * nu))
        mark("subadditivity", wf_norm_2alpha(uv, ALPHA).total <= nu + nv + 1e-9 * (nu + nv))
    for _ in range(200):
        n, m = int(rng.integers(1, 3)), int(rng.integers(0, 2))
        if n + m > 2:
            m = 0
        A, B = _random_point(rng, n, m), _random_point(rng, n, m)
        mark("symmetry", rho(A, B) == rho(B, A) and rho(A, A) == 0.0 and (rho(A, B) > 0) == (A != B))
    for _ in range(300):
        # all spatial parts in the closure of one region: M_{1} (x <= 1) or far region (x >= 1)
        lo, hi = (0.0, 1.0) if rng.uniform() < 0.5 else (1.0, 5.0)
        pts = [Point(float(rng.uniform(0, 1)), SpatialPoint((float(rng.uniform(lo, hi)),),
                                                            (float(rng.uniform(-1, 1)),)))
               for _ in range(3)]
        A, B, C = pts
        mark("triangle", rho(A, C) <= rho(A, B) + rho(B, C) + 1e-12)
    for trial in range(6):
        n, m = (1, 0) if trial % 2 == 0 else (1, 1)
        J = 60 if m == 0 else 30
        u, _ = _random_field(rng, n, m, J=J)
        full = wf_seminorm(u, ALPHA)
        sub = wf_seminorm(u, ALPHA, pair_budget=max(2000, u.values.size ** 2 // 20))
        mark("budget>=90%", 0.9 * full <= sub <= full + 1e-12)
    ok = all(a == b for a, b in tally.values())
    return ok, "seed %d: " % SEED + ", ".join(f"{k} {a}/{b}" for k, (a, b) in tally.items())


# --------------------------------------------------------------------------
# 9. cut-offs and partition of unity
# --------------------------------------------------------------------------

def criterion_9():
    rng = np.random.default_rng(SEED)
    seq = build_cutoff_sequence(SpatialPoint((1.0,), (0.0,)), r=0.2, T0=0.4, T=1.0, N_max=6)
    c = seq.center
    ident = 0.0
    for N in range(7):
        d = rng.normal(size=(500, 2))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        inside = c + d * rng.uniform(0, seq.radius(N), size=(500, 1))
        outside = c + d * rng.uniform(seq.radius(N + 1), 3, size=(500, 1))
        t_in = rng.uniform(seq.time(N), seq.T, size=500)
        t_out = rng.uniform(0, seq.time(N + 1), size=500)
        ident = max(ident, float(np.abs(seq.evaluate(N, t_in, inside) - 1).max()),
                    float(np.abs(seq.evaluate(N, seq.T, outside)).max()),
                    float(np.abs(seq.evaluate(N, t_out, inside)).max()))
    pou = 0.0
    for n, m in ((1, 0), (1, 1), (2, 0)):
        P = build_partition(0.15, n, m, x_max=2.0, y_max=1.0)
        X = np.concatenate([rng.uniform(0, 2, size=(1000, n)), rng.uniform(-1, 1, size=(1000, m))], axis=1)
        pou = max(pou, float(np.abs(P.phi_matrix(X).sum(axis=-1) - 1).max()))
    resid = {}
    for k in (0, 1):
        g = cutoff_growth(build_cutoff_sequence(SpatialPoint((3.0,)), r=0.05, T0=0.5, T=1.0, N_max=6, k=k))
        resid[k] = g["residual"]
    ok = ident <= 1e-12 and pou <= 1e-12 and all(v <= 0.10 for v in resid.values())
    return ok, (f"plateau/support error {ident:.1e}, |sum phi - 1| {pou:.1e} at 3x1000 points (<= 1e-12); "
                f"growth fit residual over N=0..6: k=0 {resid[0]:.4f}, k=1 {resid[1]:.4f} (<= 0.10)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("idx", range(1, 10))
def test_criterion(idx, capsys):
    ok, text = CRITERIA[idx - 1]()
    report(idx, ok, text, capsys)
    assert ok, text


if __name__ == "__main__":
    status = 0
    for i, crit in enumerate(CRITERIA, start=1):
        ok, text = crit()
        report(i, ok, text)
        status |= not ok
    sys.exit(status)
