import numpy as np
import pytest

from kimuralab import exprlang as el
from kimuralab.holder import (HolderReport, MissingDerivative, SampledField, SupportViolation,
                              check_lemma_Lu_bound, sup_norm, wf_norm_2alpha, wf_norm_alpha,
                              wf_seminorm)
from kimuralab.interpolation import family_field, smooth_family
from kimuralab.operator import CoefficientSet

T0 = np.array([0.0])
SQ = np.linspace(0, 1, 41) ** 2  # uniform in sqrt(x)


def field(text, axes=(SQ,), times=T0, n=1, m=0):
    return SampledField.from_expr(el.parse(text), times, list(axes), n, m)


def test_sup_norm_examples():
    assert sup_norm(field("3")) == 3.0
    assert sup_norm(field("0")) == 0.0
    assert sup_norm(field("x1")) == 1.0


def test_sup_norm_empty():
    u = field("x1")
    with pytest.raises(ValueError):
        sup_norm(u, mask=np.zeros(u.values.size, dtype=bool))


def test_seminorm_examples():
    assert wf_seminorm(field("5"), 0.5) == 0.0
    for a in (0.2, 0.5, 0.8):
        assert wf_seminorm(field("sqrt(x1)"), a) == pytest.approx(1.0, abs=1e-12)
    # stationary point sqrt(x') = alpha/(2-alpha) = 1/3 lies on the grid
    assert wf_seminorm(field("x1"), 0.5) == pytest.approx(1.0887, abs=1e-3)
    s = 1 / 3
    assert wf_seminorm(field("x1"), 0.5) <= (1 + s) * (1 - s) ** 0.5 + 1e-12


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 1.5])
def test_invalid_alpha(alpha):
    with pytest.raises(ValueError):
        wf_seminorm(field("x1"), alpha)


def test_norm_2alpha_examples():
    # box inside the closure of M_{1} only: total is |c|
    c = wf_norm_2alpha(field("-2.5", axes=(np.linspace(0, 0.9, 21) ** 2,)), 0.5)
    assert c.total == 2.5
    assert all(v == 0 for k, v in c.weighted_component_norms.items() if not k.endswith(": u"))
    # [0, 1] also meets the closure of M_emptyset at x = 1: one |c| per region
    assert wf_norm_2alpha(field("-2.5"), 0.5).total == 5.0
    lin = wf_norm_2alpha(field("x1"), 0.5).weighted_component_norms
    assert lin["I={1}: u_x1"] == 1.0
    assert lin["I={1}: sqrt(x1 x1) u_x1x1"] == 0.0
    q = wf_norm_2alpha(field("x1^2"), 0.5)
    comp = q.weighted_component_norms["I={1}: sqrt(x1 x1) u_x1x1"]
    # sup 2x = 2 on [0, 1] plus the seminorm of 2x, which is 2 * 1.0887
    assert comp == pytest.approx(2 + 2 * wf_seminorm(field("x1"), 0.5), abs=1e-12)
    assert q.total >= q.sup_norm
    assert all(v >= 0 for v in q.weighted_component_norms.values())


def test_missing_slot():
    u = SampledField(T0, [SQ], SQ[None] ** 2, 1, 0)
    with pytest.raises(MissingDerivative):
        wf_norm_2alpha(u, 0.5)


def test_report_csv_header():
    text = wf_norm_2alpha(field("x1^2"), 0.5).to_csv()
    lines = text.splitlines()
    assert lines[0] == "component,value"
    assert lines[1].startswith("box,t[0.0,0.0];x1[0.0,1.0]")
    assert lines[-2].startswith("total,") and lines[-1].startswith("pair_count_used,")


def test_homogeneity(rng):
    u = field("exp(-x1)*sin(3*x1)")
    for lam in rng.uniform(-5, 5, 5):
        v = u.with_values(lam * u.values, source=el.mul(el.Num(float(lam)), u.source))
        assert wf_seminorm(v, 0.5) == pytest.approx(abs(lam) * wf_seminorm(u, 0.5), rel=1e-12)
        assert wf_norm_2alpha(v, 0.5).total == pytest.approx(abs(lam) * wf_norm_2alpha(u, 0.5).total,
                                                            rel=1e-12)


def test_subadditivity(rng):
    axes = [np.linspace(0, 2, 17) ** 2, np.linspace(-1, 1, 9)]
    t = np.linspace(0, 1, 3)
    for _ in range(5):
        a, b = rng.normal(size=(2, 3, 17, 9))
        u = SampledField(t, axes, a, 1, 1)
        v = SampledField(t, axes, b, 1, 1)
        w = SampledField(t, axes, a + b, 1, 1)
        assert wf_seminorm(w, 0.4) <= wf_seminorm(u, 0.4) + wf_seminorm(v, 0.4) + 1e-12


def test_domain_monotonicity():
    u = field("sin(4*x1)*exp(x1)", axes=(np.linspace(0, 2, 33) ** 2,))
    big = wf_norm_2alpha(u, 0.5).total
    small = wf_norm_2alpha(u.restrict(box=[(0.0, 1.5)]), 0.5).total
    assert small <= big


def test_budget_soundness():
    u = field("sin(5*x1)*exp(-x1) + x1*y1", axes=(np.linspace(0, 3, 41) ** 2, np.linspace(-1, 1, 21)),
              times=np.linspace(0, 1, 5), m=1)
    full, nf = wf_seminorm(u, 0.5, return_count=True)
    sub, ns = wf_seminorm(u, 0.5, pair_budget=20_000, return_count=True)
    assert ns < nf
    assert sub <= full
    assert sub >= 0.9 * full


def test_alpha_norm_includes_derivatives():
    rep = wf_norm_alpha(field("x1^2"), 0.5, k=1)
    assert "u" in rep.weighted_component_norms and "D_x1" in rep.weighted_component_norms


def test_lemma_zero_field_passes():
    mb = [m for m in smooth_family(1, 0) if m.support == frozenset({1})][0]
    u = family_field(mb, 1, 0, J=16, nt=3)
    z = u.with_values(np.zeros_like(u.values), source=el.Num(0.0))
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})
    rep = check_lemma_Lu_bound(L, z, frozenset({1}), 0.5, [1e-3, 0.5, 0.99], constants=(1.0, 0.5))
    assert rep.passed and rep.measured["LHS"] == 0.0


def test_lemma_support_violation():
    u = field("exp(-x1)", axes=(np.linspace(0, 2, 17) ** 2,))
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1"})
    with pytest.raises(SupportViolation):
        check_lemma_Lu_bound(L, u, frozenset({1}), 0.5, [0.1], constants=(1.0, 0.5))


def test_lemma_smooth_bump():
    mb = smooth_family(1, 0)[0]
    u = family_field(mb, 1, 0, J=16, nt=3)
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})
    rep = check_lemma_Lu_bound(L, u, mb.support, 0.5, [1e-3, 0.1, 0.99])
    assert rep.passed
    # eps -> 1: the bound is (Lambda + C) * norm dominated
    m = rep.measured
    assert m["LHS"] <= (m["Lambda"] + m["C"]) * m["norm_2alpha"] + m["C"] * m["sup"]
