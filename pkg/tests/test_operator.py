import numpy as np
import pytest

from kimuralab import exprlang as el
from kimuralab.geometry import Point, SpatialPoint
from kimuralab.holder import SampledField
from kimuralab.operator import (Box, CoefficientSet, SamplingSpec, apply, apply_discrete,
                                apply_expr, compute_Lambda, freeze_coefficients,
                                validate_assumptions)
from kimuralab.solver import SolveConfig, make_grid


def at(x=(), y=(), t=0.0):
    return Point(t, SpatialPoint(x, y))


def test_apply_linear_gives_drift():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "1"})
    for x in (0.0, 0.3, 2.0):
        assert apply(L, el.parse("x1"), at((x,))) == pytest.approx(1.0)


def test_apply_mixed_example(rng):
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1", "b1": "1", "d11": "1"})
    u = el.parse("x1^2 + y1^2")
    for x, y in zip(rng.uniform(0, 3, 5), rng.uniform(-1, 1, 5)):
        assert apply(L, u, at((x,), (y,))) == pytest.approx(4 * x + 2, abs=1e-12)


def test_apply_constant_is_zero():
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1+x1", "b1": "0.3", "c11": "0.1", "d11": "2", "e1": "1"})
    assert apply(L, el.parse("7"), at((0.4,), (0.2,))) == 0.0


def test_apply_linearity(rng):
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1+x1", "b1": "0.3", "atilde11": "0.2",
                                           "c11": "0.1", "d11": "2", "e1": "1"})
    u, v = el.parse("x1^3*y1"), el.parse("exp(-x1)*cos(y1)")
    a, b = 1.3, -0.4
    w = el.add(el.mul(el.Num(a), u), el.mul(el.Num(b), v))
    for x, y in zip(rng.uniform(0, 3, 10), rng.uniform(-1, 1, 10)):
        p = at((x,), (y,))
        assert apply(L, w, p) == pytest.approx(a * apply(L, u, p) + b * apply(L, v, p), abs=1e-12)


def test_degenerate_terms_vanish_at_boundary():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "atilde11": "0.5"})
    u = el.parse("sin(x1)")
    vals = [abs(apply(L, u, at((2.0 ** -k,)))) for k in range(5, 30, 5)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-8


def test_apply_discrete_linear_and_quadratic():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "1"})
    g = make_grid(SolveConfig(J=16, x_max=1.0))
    t = np.array([0.0])
    lin = SampledField.from_expr(el.parse("x1"), t, g.axes, 1, 0)
    lin.grid = g
    out = apply_discrete(L, lin)
    assert np.max(np.abs(out.values - 1.0)) <= 1e-10
    quad = SampledField(t, g.axes, g.x_nodes[None] ** 2, 1, 0, grid=g)
    out = apply_discrete(L, quad).values[0]
    x = g.x_nodes
    assert np.max(np.abs(out[1:-1] - (2 * x + 2 * x)[1:-1])) <= 1e-10
    zero = SampledField(t, g.axes, np.zeros((1, len(x))), 1, 0, grid=g)
    assert np.all(apply_discrete(L, zero).values == 0)


def test_validate_examples():
    ok = validate_assumptions(CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"}))
    assert ok.delta_hat == pytest.approx(1.0)
    assert ok.b_min_boundary == pytest.approx(0.5)
    assert ok.ok
    bad = validate_assumptions(CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "-0.1"}))
    assert not bad.passed["nonnegativity"]
    assert bad.b_min_boundary == pytest.approx(-0.1)
    assert "NonnegativityViolation" in bad.violations


def test_validate_cross_term_eigenvalue():
    L = CoefficientSet.from_mapping(2, 0, {"a1": "1", "a2": "1", "atilde12": "0.4", "atilde21": "0.4"})
    rep = validate_assumptions(L, SamplingSpec(points_per_region=60))
    # region {1,2}: the form is [[1, .4], [.4, 1]]
    assert rep.delta_per_region["12"] == pytest.approx(0.6, abs=1e-6)
    # far from both faces x1 x2 atilde12 outgrows x1 a11 and x2 a22, so a constant
    # atilde12 is not elliptic on the whole box and the report says so
    assert rep.delta_per_region["empty"] < 0
    assert not rep.passed["ellipticity"]


def test_freeze_examples():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1+x1", "b1": "x1"})
    F = freeze_coefficients(L, SpatialPoint((0.25,)), frozenset({1}))
    assert el.constant_value(F.a[0]) == pytest.approx(1.25)
    assert el.constant_value(F.b[0]) == pytest.approx(0.25)
    assert F.degenerate[0]
    C = CoefficientSet.from_mapping(1, 0, {"a1": "2", "b1": "0.5"})
    Fc = freeze_coefficients(C, SpatialPoint((0.4,)), frozenset({1}))
    u = el.parse("x1^3")
    for x in (0.0, 0.3, 1.7):
        assert apply(Fc, u, at((x,))) == apply(C, u, at((x,)))
    G = freeze_coefficients(CoefficientSet.from_mapping(1, 0, {"a1": "1"}), SpatialPoint((2.0,)), frozenset())
    # no x factor left: 2 u_xx
    for x in (0.0, 0.5, 3.0):
        assert apply(G, el.parse("x1^2"), at((x,))) == pytest.approx(4.0)


def test_frozen_operator_agrees_at_the_point(rng):
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1+x1*y1^2", "b1": "0.5+x1", "atilde11": "0.1*exp(-x1)",
                                           "c11": "0.2*y1", "d11": "1+x1", "e1": "sin(x1)"})
    u = el.parse("x1^3*y1 + x1^2 - y1^4")
    for x, y in zip(rng.uniform(0, 2, 5), rng.uniform(-1, 1, 5)):
        z = SpatialPoint((x,), (y,))
        F = freeze_coefficients(L, z, frozenset({1}))
        assert apply(L, u, Point(0, z)) - apply(F, u, Point(0, z)) == pytest.approx(0.0, abs=1e-12)


def test_lambda_examples():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})
    assert compute_Lambda(L, Box(((0.0, 1.0),)), frozenset({1})) == pytest.approx(1.5)
    Z = CoefficientSet.from_mapping(1, 0, {})
    assert compute_Lambda(Z, Box(((0.0, 1.0),)), frozenset({1})) == 0.0
    A = CoefficientSet.from_mapping(1, 0, {"a1": "x1"})
    assert compute_Lambda(A, Box(((0.0, 1.0),)), frozenset({1})) == pytest.approx(1.0, abs=1e-3)


def test_lambda_monotone():
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1+x1", "b1": "x1^2", "d11": "1+y1^2", "c11": "y1"})
    small = compute_Lambda(L, Box(((0.0, 0.5),), ((-0.2, 0.2),)), frozenset({1}))
    big = compute_Lambda(L, Box(((0.0, 1.0),), ((-0.5, 0.5),)), frozenset({1}))
    assert big >= small


def test_apply_expr_matches_apply():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "2", "b1": "0.1"})
    e = apply_expr(L, el.parse("x1^2"))
    assert el.evaluate(e, {"x1": 1.5}) == pytest.approx(apply(L, el.parse("x1^2"), at((1.5,))))
