import numpy as np
import pytest

from kimuralab import exprlang as el
from kimuralab.operator import CoefficientSet, NonnegativityViolation, apply_discrete
from kimuralab.solver import (SolveConfig, discretize, estimate_derivatives, graded_nodes,
                              make_grid, solve_ivp)


def test_graded_nodes_formula():
    np.testing.assert_allclose(graded_nodes(4, 1.0), [0, 1 / 16, 1 / 4, 9 / 16, 1], atol=0)


def test_make_grid_examples():
    g = make_grid(SolveConfig(n=1, m=1, J=8, Ny=4, y_max=1.0))
    np.testing.assert_array_equal(g.y_nodes, [-1, -0.5, 0, 0.5, 1])
    assert g.x_nodes[0] == 0.0
    assert np.all(np.diff(g.x_nodes) > 0)
    np.testing.assert_allclose(np.diff(np.sqrt(g.x_nodes)), np.sqrt(4.0) / 8, atol=1e-12)
    with pytest.raises(ValueError):
        make_grid(SolveConfig(J=2))


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(tol=-1.0), dict(margin=1.0), dict(scheme="rk4"),
                                dict(boundary="periodic")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolveConfig(**kw)


def test_discretize_examples(L1):
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "1"})
    g = make_grid(SolveConfig(J=16))
    A = discretize(L, g)
    x = g.x_nodes
    np.testing.assert_allclose(A @ x, 1.0, atol=1e-10)
    np.testing.assert_allclose(A @ np.full_like(x, 3.0), 0.0, atol=1e-12)
    np.testing.assert_allclose((A @ x ** 2)[1:-1], (2 * x + 2 * x)[1:-1], atol=1e-10)


def test_degenerate_rows_vanish_at_boundary():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "atilde11": "0.3"})
    g = make_grid(SolveConfig(J=16))
    A = discretize(L, g).toarray()
    assert np.all(A[0] == 0.0)


def test_negative_drift_refused():
    L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "-0.1"})
    with pytest.raises(NonnegativityViolation):
        discretize(L, make_grid(SolveConfig(J=16)))


def test_quadratics_exact_in_2d_interior():
    L = CoefficientSet.from_mapping(1, 1, {"a1": "1", "b1": "0.5", "c11": "0.2", "d11": "1", "e1": "0.1",
                                           "atilde11": "0.3"})
    g = make_grid(SolveConfig(n=1, m=1, J=12, Ny=8))
    env = g.env()
    for text in ("x1^2", "x1*y1", "y1^2", "x1 + y1"):
        u = el.parse(text)
        Lu = discretize(L, g) @ el.evaluate(u, env)
        from kimuralab.operator import apply_expr
        exact = np.broadcast_to(el.evaluate(apply_expr(L, u), env), Lu.shape)
        inner = ~g.outer_mask() & ~g.degenerate_face_mask(0) & (np.abs(env["y1"]) < 1)
        np.testing.assert_allclose(Lu[inner], exact[inner], atol=1e-10)


def test_solve_examples(L1):
    cfg = SolveConfig(J=16, dt=0.05, T=1.0)
    u = solve_ivp(L1, "0", "-1", cfg)
    for k, t in enumerate(u.times):
        np.testing.assert_allclose(u.values[k], -t, atol=1e-12)
    u = solve_ivp(L1, "x1", None, cfg)
    x = u.grid.x_nodes
    np.testing.assert_allclose(u.values[-1], x + 0.5, atol=1e-10)


def test_solve_quadratic_converges(L1):
    b = 0.5

    def exact(t, x):
        return x ** 2 + 2 * (1 + b) * x * t + (1 + b) * b * t ** 2

    errs = []
    for J, dt in ((16, 0.02), (32, 0.005)):
        cfg = SolveConfig(J=J, dt=dt, T=0.5, boundary="oracle-Dirichlet")
        u = solve_ivp(L1, "x1^2", None, cfg, exact=lambda t, env: exact(t, env["x1"]))
        errs.append(np.max(np.abs(u.values[-1] - exact(0.5, u.grid.x_nodes))))
    assert errs[1] < errs[0] / 3


def test_linearity_of_solution_map(L11):
    cfg = SolveConfig(n=1, m=1, J=12, Ny=6, dt=0.05, T=0.5)
    f1, g1 = el.parse("exp(-x1)*cos(y1)"), el.parse("0.3*x1")
    f2, g2 = el.parse("x1*y1"), el.parse("-1")
    a = 2.5
    u1 = solve_ivp(L11, f1, g1, cfg)
    u2 = solve_ivp(L11, f2, g2, cfg)
    u = solve_ivp(L11, el.add(el.mul(el.Num(a), f1), f2), el.add(el.mul(el.Num(a), g1), g2), cfg)
    np.testing.assert_allclose(u.values, a * u1.values + u2.values, atol=1e-9)


def test_discrete_comparison(L11):
    cfg = SolveConfig(n=1, m=1, J=12, Ny=6, dt=0.05, T=0.5)
    u = solve_ivp(L11, "-x1^2*exp(-y1^2)", "-0.2", cfg)
    assert u.values.max() <= 10 * cfg.tol


def test_crank_nicolson_runs(L1):
    u = solve_ivp(L1, "x1", None, SolveConfig(J=16, dt=0.1, scheme="crank-nicolson"))
    np.testing.assert_allclose(u.values[-1], u.grid.x_nodes + 0.5, atol=1e-10)


def test_estimate_derivatives_examples(L1):
    g = make_grid(SolveConfig(J=16))
    from kimuralab.solver import SpaceTimeField
    x = g.x_nodes
    f = SpaceTimeField(g, np.array([0.0, 1.0]), np.stack([x ** 2, x ** 2]))
    d = estimate_derivatives(f)
    np.testing.assert_allclose(d.slot(0, [2])[:, 1:-1], 2.0, atol=1e-8)
    np.testing.assert_allclose(d.slot(0, [1])[:, 1:-1], np.broadcast_to(2 * x, (2, len(x)))[:, 1:-1],
                               atol=1e-8)
    c = estimate_derivatives(SpaceTimeField(g, np.array([0.0, 1.0]), np.full((2, len(x)), 4.0)))
    for z in ([1], [2]):
        np.testing.assert_allclose(c.slot(0, z), 0.0, atol=1e-10)
    np.testing.assert_allclose(c.slot(1, [0]), 0.0, atol=0)


def test_time_slot_matches_residual(L1):
    u = solve_ivp(L1, "x1^2", "0.3", SolveConfig(J=16, dt=0.05, T=0.5))
    d = estimate_derivatives(u)
    Lu = apply_discrete(L1, u.sampled()).values
    inner = slice(0, -1)
    res = d.slot(1, [0])[1:, inner] - Lu[1:, inner]
    np.testing.assert_allclose(res, 0.3, atol=1e-10)


def test_field_round_trip(tmp_path, L11):
    from kimuralab.fieldio import read_field_csv
    u = solve_ivp(L11, "x1*y1", None, SolveConfig(n=1, m=1, J=8, Ny=4, dt=0.25, T=0.5))
    p = tmp_path / "u.csv"
    u.to_csv(p)
    back = read_field_csv(p)
    np.testing.assert_array_equal(back.values, u.values)
    np.testing.assert_array_equal(back.times, u.times)
    assert back.meta["format"] == "kimuralab-field-1"
    assert open(p).readline().strip() == "t,x1,y1,u"
