import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kimuralab import exprlang as el
from kimuralab.exprlang import BinOp, Num, Var


def ev(text, **env):
    return el.evaluate(el.parse(text), env)


def test_parse_examples():
    e = el.parse("x1*(1 - x1)", n=1, m=0)
    assert isinstance(e, BinOp) and e.op == "*"
    assert e.left == Var("x1")
    assert el.parse("0.5") == Num(0.5)
    with pytest.raises(el.VariableOutOfRange):
        el.parse("x3", n=2, m=0)


def test_syntax_error_has_offset():
    with pytest.raises(el.ExprSyntaxError) as info:
        el.parse("x1 + * 2")
    assert info.value.offset == 5


def test_unknown_identifier():
    with pytest.raises(el.UnknownIdentifier):
        el.parse("z1 + 1")


def test_precedence():
    assert ev("-x1^2", x1=3.0) == -9.0
    assert ev("2*3^2", ) == 18.0
    assert ev("8/4/2") == 1.0
    assert ev("1-2-3") == -4.0


def test_eval_examples():
    assert ev("x1*(1-x1)", x1=0.25) == 0.1875
    assert ev("sqrt(x1)", x1=4.0) == 2.0
    with pytest.raises(el.EvaluationError):
        ev("1/x1", x1=0.0)
    with pytest.raises(el.EvaluationError):
        ev("sqrt(x1)", x1=-1.0)


def test_differentiate_examples():
    d = el.differentiate(el.parse("x1^2"), "x1")
    xs = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(el.evaluate(d, {"x1": xs}), 2 * xs)
    assert el.constant_value(el.differentiate(el.parse("x1"), "y1")) == 0.0
    ds = el.differentiate(el.parse("sqrt(x1)"), "x1")
    assert el.evaluate(ds, {"x1": 0.25}) == pytest.approx(1.0, abs=1e-12)
    h = 1e-6
    fd = (np.sqrt(0.25 + h) - np.sqrt(0.25 - h)) / (2 * h)
    assert abs(el.evaluate(ds, {"x1": 0.25}) - fd) <= 1e-8


SMOOTH = ["x1^3*y1 - 2*x1", "exp(-x1)*sin(y1)", "sqrt(1 + x1^2)*cos(x1*y1)", "(x1 + 2)/(y1^2 + 1)"]


@pytest.mark.parametrize("text", SMOOTH)
def test_finite_difference_consistency(text, rng):
    e = el.parse(text)
    for v in ("x1", "y1"):
        d = el.differentiate(e, v)
        pts = {"x1": rng.uniform(0.1, 2, 20), "y1": rng.uniform(-1, 1, 20)}
        errs = []
        for h in (1e-2, 5e-3):
            up, dn = dict(pts), dict(pts)
            up[v] = pts[v] + h
            dn[v] = pts[v] - h
            fd = (el.evaluate(e, up) - el.evaluate(e, dn)) / (2 * h)
            errs.append(np.max(np.abs(fd - el.evaluate(d, pts))))
        # second order: halving h quarters the error
        assert errs[1] <= errs[0] / 3 + 1e-12


def test_linearity_of_differentiation(rng):
    e1, e2 = el.parse("x1^2*exp(y1)"), el.parse("sin(x1)*y1^3")
    a = 1.7
    comb = el.add(el.mul(Num(a), e1), e2)
    pts = {"x1": rng.uniform(0, 2, 100), "y1": rng.uniform(-1, 1, 100)}
    for v in ("x1", "y1"):
        lhs = el.evaluate(el.differentiate(comb, v), pts)
        rhs = a * el.evaluate(el.differentiate(e1, v), pts) + el.evaluate(el.differentiate(e2, v), pts)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def _exprs():
    leaf = st.one_of(st.sampled_from(["x1", "x2", "y1", "t"]),
                     st.floats(0, 10, allow_nan=False).map(lambda v: repr(round(v, 3))))

    def extend(child):
        return st.one_of(
            st.tuples(child, st.sampled_from("+-*/"), child).map(lambda p: f"({p[0]} {p[1]} {p[2]})"),
            child.map(lambda c: f"-{c}"),
            st.tuples(child, st.integers(0, 4)).map(lambda p: f"({p[0]})^{p[1]}"),
            st.tuples(st.sampled_from(["sqrt", "exp", "sin", "cos"]), child).map(lambda p: f"{p[0]}({p[1]})"),
        )
    return st.recursive(leaf, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_exprs())
def test_round_trip(text):
    e = el.parse(text)
    assert el.parse(el.to_string(e)) == e


def test_variables_and_degree():
    e = el.parse("x1^2*y1 + 3")
    assert el.variables(e) == {"x1", "y1"}
    assert el.degree(e) == 3
    assert el.degree(el.parse("exp(x1)")) is None
