"""Generalized Kimura operators.

    L u = sum_i (x_i a_ii u_{x_i x_i} + b_i u_{x_i})
        + sum_{i,j} x_i x_j at_ij u_{x_i x_j}
        + sum_{i,l} x_i c_il u_{x_i y_l}
        + sum_{k,l} d_kl u_{y_k y_l} + sum_l e_l u_{y_l}

Coefficients are expressions in the spatial variables.  A
:class:`CoefficientSet` also carries a ``degenerate`` mask; for an axis
whose flag is False the factor ``x_i`` is replaced by 1.  Frozen operators
use this to represent terms such as ``x_i^N a_ii(z^N) u_{x_i x_i}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import exprlang as el
from .exprlang import Expr, Num, Var
from .geometry import RegionIndex, SpatialPoint, all_regions
from .pairs import Nodes, max_ratio_all

__all__ = [
    "CoefficientSet", "AssumptionReport", "SamplingSpec", "Box",
    "AssumptionViolation", "NonnegativityViolation",
    "apply", "apply_expr", "apply_discrete", "validate_assumptions",
    "freeze_coefficients", "compute_Lambda", "ellipticity_matrix",
]


class AssumptionViolation(ValueError):
    kind = "AssumptionViolation"


class NonnegativityViolation(AssumptionViolation):
    kind = "NonnegativityViolation"


def _expr(v, n, m) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, np.floating, np.integer)):
        return Num(float(v))
    e = el.parse(str(v), n=n, m=m, allow_t=False)
    return e


@dataclass(frozen=True)
class CoefficientSet:
    n: int
    m: int
    a: tuple = ()
    atilde: tuple = ()
    b: tuple = ()
    c: tuple = ()
    d: tuple = ()
    e: tuple = ()
    degenerate: tuple = ()

    def __post_init__(self):
        n, m = self.n, self.m
        if n < 0 or m < 0 or n + m < 1:
            raise ValueError(f"need n, m >= 0 and n + m >= 1, got ({n}, {m})")
        z = Num(0.0)

        def vec(v, k):
            v = tuple(v) if v else (z,) * k
            if len(v) != k:
                raise ValueError(f"expected {k} coefficients, got {len(v)}")
            return tuple(_expr(e, n, m) for e in v)

        def mat(v, r, c):
            v = tuple(tuple(row) for row in v) if v else ((z,) * c,) * r
            if len(v) != r or any(len(row) != c for row in v):
                raise ValueError(f"expected a {r}x{c} coefficient block")
            return tuple(tuple(_expr(e, n, m) for e in row) for row in v)

        object.__setattr__(self, "a", vec(self.a, n))
        object.__setattr__(self, "b", vec(self.b, n))
        object.__setattr__(self, "e", vec(self.e, m))
        object.__setattr__(self, "atilde", mat(self.atilde, n, n))
        object.__setattr__(self, "c", mat(self.c, n, m))
        object.__setattr__(self, "d", mat(self.d, m, m))
        deg = tuple(bool(f) for f in self.degenerate) if self.degenerate else (True,) * n
        if len(deg) != n:
            raise ValueError("degenerate mask has the wrong length")
        object.__setattr__(self, "degenerate", deg)
        for e in self.expressions():
            if "t" in el.variables(e):
                raise ValueError("coefficients must not depend on t")

    @classmethod
    def from_mapping(cls, n: int, m: int, coeffs: Mapping[str, object]) -> "CoefficientSet":
        """Build from flat names: ``a1``, ``atilde12``, ``b1``, ``c11``, ``d11``, ``e1``.

        Missing entries are zero.  Unknown names raise ``KeyError``.
        """
        a = [0.0] * n
        b = [0.0] * n
        e = [0.0] * m
        at = [[0.0] * n for _ in range(n)]
        c = [[0.0] * m for _ in range(n)]
        d = [[0.0] * m for _ in range(m)]
        for key, val in coeffs.items():
            name = key.lower()
            for prefix, target, shape in (("atilde", at, (n, n)), ("a", a, (n,)),
                                          ("b", b, (n,)), ("c", c, (n, m)),
                                          ("d", d, (m, m)), ("e", e, (m,))):
                if name.startswith(prefix) and name[len(prefix):].isdigit():
                    digits = name[len(prefix):]
                    if len(shape) == 1:
                        k = int(digits) - 1
                        if not 0 <= k < shape[0]:
                            raise KeyError(f"coefficient {key} out of range")
                        target[k] = val
                    else:
                        if len(digits) != 2:
                            raise KeyError(f"coefficient {key} needs two one-digit indices")
                        r, s = int(digits[0]) - 1, int(digits[1]) - 1
                        if not (0 <= r < shape[0] and 0 <= s < shape[1]):
                            raise KeyError(f"coefficient {key} out of range")
                        target[r][s] = val
                    break
            else:
                raise KeyError(f"unknown coefficient name {key!r}")
        return cls(n, m, a=a, atilde=at, b=b, c=c, d=d, e=e)

    def expressions(self):
        yield from self.a
        yield from self.b
        yield from self.e
        for row in self.atilde + self.c + self.d:
            yield from row

    @property
    def is_constant(self) -> bool:
        return all(el.is_constant(e) for e in self.expressions())

    def factor(self, i: int) -> Expr:
        """``x_i`` for a degenerate axis, 1 otherwise (0-based ``i``)."""
        return Var(f"x{i + 1}") if self.degenerate[i] else Num(1.0)

    def factor_value(self, i: int, x):
        return x if self.degenerate[i] else np.ones_like(np.asarray(x, dtype=float))


def coefficient_values(L: CoefficientSet, env) -> dict:
    """Evaluate every coefficient on the bindings ``env`` (arrays broadcast)."""
    shape = np.shape(next(iter(env.values()))) if env else ()

    def ev(e):
        return np.broadcast_to(np.asarray(el.evaluate(e, env), dtype=float), shape)

    n, m = L.n, L.m
    return {
        "a": [ev(L.a[i]) for i in range(n)],
        "b": [ev(L.b[i]) for i in range(n)],
        "e": [ev(L.e[l]) for l in range(m)],
        "atilde": [[ev(L.atilde[i][j]) for j in range(n)] for i in range(n)],
        "c": [[ev(L.c[i][l]) for l in range(m)] for i in range(n)],
        "d": [[ev(L.d[k][l]) for l in range(m)] for k in range(m)],
    }


def apply_expr(L: CoefficientSet, u: Expr) -> Expr:
    """Symbolic ``L u``."""
    n, m = L.n, L.m
    xs = [f"x{i + 1}" for i in range(n)]
    ys = [f"y{l + 1}" for l in range(m)]
    d = el.differentiate
    ux = [d(u, v) for v in xs]
    uy = [d(u, v) for v in ys]
    out: Expr = Num(0.0)
    for i in range(n):
        out = out + L.factor(i) * L.a[i] * d(ux[i], xs[i]) + L.b[i] * ux[i]
        for j in range(n):
            out = out + L.factor(i) * L.factor(j) * L.atilde[i][j] * d(ux[i], xs[j])
        for l in range(m):
            out = out + L.factor(i) * L.c[i][l] * d(ux[i], ys[l])
    for k in range(m):
        for l in range(m):
            out = out + L.d[k][l] * d(uy[k], ys[l])
        out = out + L.e[k] * uy[k]
    return out


def apply(L: CoefficientSet, u: Expr, p) -> float:
    """Evaluate ``L u`` at a :class:`~kimuralab.geometry.Point` (or SpatialPoint)."""
    z = p.z if hasattr(p, "z") else p
    if z.n != L.n or z.m != L.m:
        raise ValueError("point dimensions do not match the operator")
    env = p.env()
    return float(el.evaluate(apply_expr(L, u), env))


def apply_discrete(L: CoefficientSet, u):
    """Apply the finite-difference form of ``L`` to every time slice of ``u``.

    ``u`` is a :class:`kimuralab.holder.SampledField` on a solver grid.
    """
    from .holder import SampledField
    from .solver import discretize

    grid = u.grid
    if grid is None:
        raise ValueError("field carries no solver grid")
    if grid.n != L.n or grid.m != L.m:
        raise ValueError("grid mismatch")
    A = discretize(L, grid, check=False)
    vals = u.values.reshape(len(u.times), -1)
    out = (A @ vals.T).T.reshape(u.values.shape)
    return SampledField(u.times, u.axes, out, n=u.n, m=u.m, grid=grid, mask=u.mask)


# --------------------------------------------------------------------------
# assumptions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Axis-aligned box: ``x_bounds`` for the degenerate axes, ``y_bounds`` for the others."""

    x_bounds: tuple = ()
    y_bounds: tuple = ()

    @property
    def bounds(self):
        return tuple(self.x_bounds) + tuple(self.y_bounds)

    def sample(self, per_axis: int = 41):
        """Tensor-product nodes; x axes are graded uniformly in sqrt(x)."""
        axes = []
        for lo, hi in self.x_bounds:
            s = np.linspace(np.sqrt(lo), np.sqrt(hi), per_axis)
            axes.append(s * s)
        for lo, hi in self.y_bounds:
            axes.append(np.linspace(lo, hi, per_axis))
        if not axes:
            return np.zeros((1, 0)), np.zeros((1, 0))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=-1)
        n = len(self.x_bounds)
        return pts[:, :n], pts[:, n:]

    def contains(self, other: "Box") -> bool:
        return all(lo <= lo2 and hi2 <= hi for (lo, hi), (lo2, hi2) in zip(self.bounds, other.bounds))


@dataclass
class SamplingSpec:
    points_per_region: int = 200
    n_directions: int = 256
    x_max: float = 4.0
    y_max: float = 1.0
    alpha: float = 0.5
    seed: int = 0


@dataclass
class AssumptionReport:
    delta_hat: float
    delta_hat_directions: float
    delta_hat_symmetrized: float
    K_hat: float
    b_min_boundary: float
    b_min_per_axis: list
    passed: dict
    violations: list
    sample_counts: dict = field(default_factory=dict)
    delta_per_region: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def rows(self):
        yield "delta_hat", self.delta_hat
        yield "delta_hat_directions", self.delta_hat_directions
        yield "delta_hat_symmetrized", self.delta_hat_symmetrized
        yield "K_hat", self.K_hat
        yield "b_min_boundary", self.b_min_boundary
        for k, v in self.delta_per_region.items():
            yield f"delta_hat_I={k}", v
        for k, v in self.passed.items():
            yield f"pass_{k}", int(bool(v))


def ellipticity_matrix(L: CoefficientSet, vals: dict, x, region: RegionIndex, k: int,
                       symmetrized_cross: bool = False) -> np.ndarray:
    """Matrix ``B`` with ``v.B.v`` equal to the ellipticity form at node ``k``.

    With ``symmetrized_cross`` the x-y cross coefficients enter both
    off-diagonal slots (the form then counts each ``c_il`` twice).
    """
    n, m = L.n, L.m
    B = np.zeros((n + m, n + m))
    xs = [x[i][k] if L.degenerate[i] else 1.0 for i in range(n)]
    for i in range(n):
        B[i, i] += vals["a"][i][k] * (1.0 if (i + 1) in region else xs[i])
    for i in range(n):
        for j in range(n):
            at = vals["atilde"][i][j][k]
            ii, jj = (i + 1) in region, (j + 1) in region
            if ii and jj:
                B[i, j] += at
            elif ii and not jj:
                # x_j (at_ij + at_ji) xi_i xi_j, split over the two orders
                B[i, j] += xs[j] * at
                B[i, j] += xs[j] * vals["atilde"][j][i][k]
            elif not ii and not jj:
                B[i, j] += xs[i] * xs[j] * at
    for i in range(n):
        w = 1.0 if (i + 1) in region else xs[i]
        for l in range(m):
            cv = w * vals["c"][i][l][k]
            B[i, n + l] += cv
            if symmetrized_cross:
                B[n + l, i] += cv
    for kk in range(m):
        for l in range(m):
            B[n + kk, n + l] += vals["d"][kk][l][k]
    return B


def fibonacci_directions(dim: int, count: int) -> np.ndarray:
    """Quasi-uniform unit vectors in R^dim (dim <= 3)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if dim == 3:
        i = np.arange(count) + 0.5
        phi = np.arccos(1 - 2 * i / count)
        th = np.pi * (1 + 5 ** 0.5) * i
        return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=-1)
    rng = np.random.default_rng(0)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _region_samples(L, region, spec: SamplingSpec, rng):
    n, m, N = L.n, L.m, spec.points_per_region
    x = np.empty((N, n))
    for i in range(n):
        if (i + 1) in region:
            s = rng.uniform(0.0, 1.0, N)
            s[:2] = (0.0, 1.0)
            x[:, i] = s * s
        else:
            x[:, i] = rng.uniform(1.0, spec.x_max, N)
            x[:2, i] = (1.0, spec.x_max)
    y = rng.uniform(-spec.y_max, spec.y_max, (N, m))
    return x, y


def _weighted_family(L: CoefficientSet, vals, x, region):
    """Weighted coefficient functions entering the Hölder bound, per region."""
    n, m = L.n, L.m
    fx = [x[:, i] if L.degenerate[i] else np.ones(len(x)) for i in range(n)]
    out = []
    for i in range(n):
        out.append(vals["a"][i] if (i + 1) in region else fx[i] * vals["a"][i])
        out.append(vals["b"][i])
        for j in range(n):
            ii, jj = (i + 1) in region, (j + 1) in region
            at = vals["atilde"][i][j]
            if ii and jj:
                out.append(at)
            elif ii and not jj:
                out.append(fx[j] * at)
                out.append(fx[j] * vals["atilde"][j][i])
            elif not ii and not jj:
                out.append(fx[i] * fx[j] * at)
        for l in range(m):
            cv = vals["c"][i][l]
            out.append(cv if (i + 1) in region else fx[i] * cv)
    for k in range(m):
        out.append(vals["e"][k])
        for l in range(m):
            out.append(vals["d"][k][l])
    return out


def validate_assumptions(L: CoefficientSet, samples: SamplingSpec | None = None) -> AssumptionReport:
    """Estimate the ellipticity constant, coefficient Hölder bound and boundary drift sign."""
    spec = samples or SamplingSpec()
    rng = np.random.default_rng(spec.seed)
    n, m = L.n, L.m
    dirs = fibonacci_directions(n + m, max(spec.n_directions, 200))
    delta_dir, delta_eig, delta_sym = np.inf, np.inf, np.inf
    K_hat = 0.0
    counts, per_region = {}, {}
    for region in all_regions(n):
        tag = "".join(map(str, sorted(region))) or "empty"
        d_reg = np.inf
        x, y = _region_samples(L, region, spec, rng)
        env = {f"x{i + 1}": x[:, i] for i in range(n)}
        env.update({f"y{l + 1}": y[:, l] for l in range(m)})
        vals = coefficient_values(L, env)
        xl = [x[:, i] for i in range(n)]
        for k in range(len(x)):
            B = ellipticity_matrix(L, vals, xl, region, k)
            q = np.einsum("ij,jk,ik->i", dirs, B, dirs)
            eig = float(np.linalg.eigvalsh(0.5 * (B + B.T)).min())
            delta_dir = min(delta_dir, float(q.min()))
            delta_eig = min(delta_eig, eig)
            d_reg = min(d_reg, float(q.min()), eig)
            Bs = ellipticity_matrix(L, vals, xl, region, k, symmetrized_cross=True)
            delta_sym = min(delta_sym, float(np.linalg.eigvalsh(0.5 * (Bs + Bs.T)).min()))
        nodes = Nodes(np.zeros(len(x)), x, y)
        total = 0.0
        for f in _weighted_family(L, vals, x, region):
            f = np.asarray(f, dtype=float)
            total += float(np.abs(f).max()) + max_ratio_all(nodes, f, spec.alpha)[0]
        K_hat = max(K_hat, total)
        counts[tag] = len(x)
        per_region[tag] = d_reg
    b_min = []
    for i in range(n):
        N = spec.points_per_region
        x = np.empty((N, n))
        for j in range(n):
            x[:, j] = rng.uniform(0.0, spec.x_max, N)
        x[:, i] = 0.0
        y = rng.uniform(-spec.y_max, spec.y_max, (N, m))
        env = {f"x{j + 1}": x[:, j] for j in range(n)}
        env.update({f"y{l + 1}": y[:, l] for l in range(m)})
        bv = np.broadcast_to(np.asarray(el.evaluate(L.b[i], env), dtype=float), (N,))
        b_min.append(float(bv.min()))
    counts["boundary_faces"] = spec.points_per_region * n
    delta_hat = min(delta_dir, delta_eig)
    b_min_all = min(b_min) if b_min else 0.0
    passed = {
        "ellipticity": delta_hat > 0,
        "holder": bool(np.isfinite(K_hat)),
        "nonnegativity": b_min_all >= 0,
    }
    violations = []
    if not passed["ellipticity"]:
        violations.append("EllipticityViolation")
    if not passed["holder"]:
        violations.append("HolderBoundViolation")
    if not passed["nonnegativity"]:
        violations.append("NonnegativityViolation")
    return AssumptionReport(delta_hat, delta_dir, delta_sym, K_hat, b_min_all, b_min,
                            passed, violations, counts, per_region)


# --------------------------------------------------------------------------
# frozen operators and the Lambda constant
# --------------------------------------------------------------------------

def freeze_coefficients(L: CoefficientSet, zN: SpatialPoint, I_N: RegionIndex) -> CoefficientSet:
    """Constant-coefficient operator with coefficients evaluated at ``zN``.

    Axes in ``I_N`` keep their degenerate factor ``x_i``; for the other
    axes the factor is frozen to ``x_i^N`` and absorbed into the constant.
    ``I_N = {1..n}`` gives the model operator with all factors kept.
    """
    if zN.n != L.n or zN.m != L.m:
        raise ValueError("point dimensions do not match the operator")
    env = zN.env()
    n, m = L.n, L.m

    def val(e):
        return float(el.evaluate(e, env))

    keep = [(i + 1) in I_N for i in range(n)]
    w = [1.0 if (keep[i] or not L.degenerate[i]) else zN.x[i] for i in range(n)]
    a = [Num(w[i] * val(L.a[i])) for i in range(n)]
    at = [[Num(w[i] * w[j] * val(L.atilde[i][j])) for j in range(n)] for i in range(n)]
    c = [[Num(w[i] * val(L.c[i][l])) for l in range(m)] for i in range(n)]
    return CoefficientSet(
        n, m, a=a, atilde=at, b=[Num(val(e)) for e in L.b], c=c,
        d=[[Num(val(e)) for e in row] for row in L.d], e=[Num(val(e)) for e in L.e],
        degenerate=[L.degenerate[i] and keep[i] for i in range(n)],
    )


def compute_Lambda(L: CoefficientSet, U: Box, I: RegionIndex, per_axis: int = 41) -> float:
    """Sum of sup-norms over ``U`` of the (weighted) coefficients in the L-u estimate."""
    n, m = L.n, L.m
    x, y = U.sample(per_axis)
    env = {f"x{i + 1}": x[:, i] for i in range(n)}
    env.update({f"y{l + 1}": y[:, l] for l in range(m)})
    vals = coefficient_values(L, env)
    fx = [L.factor_value(i, x[:, i]) for i in range(n)]
    terms = []
    for i in range(n):
        inI = (i + 1) in I
        terms.append(vals["a"][i] if inI else fx[i] * vals["a"][i])
        terms.append(vals["b"][i])
        for j in range(n):
            inJ = (j + 1) in I
            at = vals["atilde"][i][j]
            if inI and inJ:
                terms.append(at)
            elif inI:
                terms.append(fx[j] * at)
            elif inJ:
                terms.append(fx[i] * at)
            else:
                terms.append(fx[i] * fx[j] * at)
        for l in range(m):
            terms.append(vals["c"][i][l] if inI else fx[i] * vals["c"][i][l])
    for k in range(m):
        terms.append(vals["e"][k])
        for l in range(m):
            terms.append(vals["d"][k][l])
    return float(sum(np.abs(np.asarray(t, dtype=float)).max() for t in terms)) if terms else 0.0
