"""Exact solutions for constant-coefficient operators with polynomial data.

With constant coefficients every term of ``L`` maps polynomials of total
degree ``<= d`` into themselves, so ``u_t = L u + g`` reduces to a linear
ODE for the monomial coefficients.  The time dependence of ``g`` is
absorbed by augmenting the state with ``w_q = t^q / q!`` (``w_q' =
w_{q-1}``), which makes the whole evolution a single matrix exponential.
"""
from __future__ import annotations

import itertools
import math
from typing import Dict, Tuple

import numpy as np

from . import exprlang as el
from .exprlang import BinOp, Expr, Func, Neg, Num, Pow, Var
from .operator import CoefficientSet

__all__ = ["PolynomialOracle", "polynomial_oracle", "to_poly", "expm_taylor", "OracleError"]

Poly = Dict[Tuple[int, ...], float]


class OracleError(ValueError):
    pass


def _padd(p: Poly, q: Poly, s: float = 1.0) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + s * v
    return {k: v for k, v in out.items() if v != 0.0}


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (a, u), (b, v) in itertools.product(p.items(), q.items()):
        k = tuple(i + j for i, j in zip(a, b))
        out[k] = out.get(k, 0.0) + u * v
    return {k: v for k, v in out.items() if v != 0.0}


def to_poly(e: Expr, names) -> Poly:
    """Polynomial in ``names`` as ``{exponents: coefficient}``."""
    names = list(names)
    zero = (0,) * len(names)
    if isinstance(e, Num):
        return {zero: e.value} if e.value != 0 else {}
    if isinstance(e, Var):
        if e.name not in names:
            raise OracleError(f"unexpected variable {e.name}")
        k = [0] * len(names)
        k[names.index(e.name)] = 1
        return {tuple(k): 1.0}
    if isinstance(e, Neg):
        return {k: -v for k, v in to_poly(e.arg, names).items()}
    if isinstance(e, Pow):
        base = to_poly(e.base, names)
        out = {zero: 1.0}
        for _ in range(e.exponent):
            out = _pmul(out, base)
        return out
    if isinstance(e, BinOp):
        p, q = to_poly(e.left, names), to_poly(e.right, names)
        if e.op == "+":
            return _padd(p, q)
        if e.op == "-":
            return _padd(p, q, -1.0)
        if e.op == "*":
            return _pmul(p, q)
        if e.op == "/":
            if any(k != zero for k in q) or not q:
                raise OracleError("division by a non-constant (or zero) polynomial")
            c = q[zero]
            return {k: v / c for k, v in p.items()}
    if isinstance(e, Func) and el.is_constant(e):
        v = el.constant_value(e)
        return {zero: v} if v != 0 else {}
    raise OracleError(f"not a polynomial: {el.to_string(e)}")


def expm_taylor(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """``exp(M)`` by scaling and squaring of a truncated Taylor series.

    The series is summed until a term's max-norm drops below ``tol`` times
    the partial sum's.
    """
    M = np.asarray(M, dtype=float)
    nrm = np.abs(M).sum(axis=1).max() if M.size else 0.0
    s = max(0, int(math.ceil(math.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    X = M / 2.0 ** s
    E = np.eye(len(M))
    term = np.eye(len(M))
    for k in range(1, 200):
        term = term @ X / k
        E = E + term
        if np.abs(term).max() <= tol * max(np.abs(E).max(), 1.0):
            break
    for _ in range(s):
        E = E @ E
    return E


class PolynomialOracle:
    """Evaluator ``u(t, env)`` of the exact solution."""

    def __init__(self, L: CoefficientSet, f: Expr, g: Expr | None, d: int):
        if not L.is_constant:
            raise OracleError("all coefficients must be constant")
        self.L, self.d = L, int(d)
        n, m = L.n, L.m
        self.names = [f"x{i + 1}" for i in range(n)] + [f"y{l + 1}" for l in range(m)]
        D = n + m
        self.basis = [k for tot in range(d + 1) for k in _exponents(D, tot)]
        self.index = {k: i for i, k in enumerate(self.basis)}
        self.A = self._matrix()
        f = el.parse(f, n=n, m=m) if isinstance(f, str) else f
        fp = to_poly(f, self.names)
        self.c0 = self._vector(fp, "f")
        g = Num(0.0) if g is None else (el.parse(g, n=n, m=m) if isinstance(g, str) else g)
        gp = to_poly(g, ["t"] + self.names)
        Q = max((k[0] for k in gp), default=0)
        self.G = np.zeros((Q + 1, len(self.basis)))
        for k, v in gp.items():
            if sum(k[1:]) > d:
                raise OracleError(f"g has spatial degree {sum(k[1:])} > {d}")
            self.G[k[0], self.index[k[1:]]] += v
        # augmented generator on (c, w_0..w_Q)
        N, Qn = len(self.basis), Q + 1
        B = np.zeros((N + Qn, N + Qn))
        B[:N, :N] = self.A
        for q in range(Qn):
            B[:N, N + q] = math.factorial(q) * self.G[q]
            if q:
                B[N + q, N + q - 1] = 1.0
        self.B = B
        self.s0 = np.concatenate([self.c0, np.eye(Qn)[0]])

    def _vector(self, p: Poly, what: str) -> np.ndarray:
        v = np.zeros(len(self.basis))
        for k, c in p.items():
            if sum(k) > self.d:
                raise OracleError(f"{what} has degree {sum(k)} > {self.d}")
            v[self.index[k]] += c
        return v

    def _matrix(self) -> np.ndarray:
        L = self.L
        n, m = L.n, L.m
        cst = el.constant_value
        A = np.zeros((len(self.basis), len(self.basis)))

        def add(col, k, coef):
            if coef == 0.0 or min(k) < 0:
                return
            A[self.index[tuple(k)], col] += coef

        for col, e in enumerate(self.basis):
            e = list(e)

            def shifted(deltas):
                k = list(e)
                for ax, dv in deltas:
                    k[ax] += dv
                return k

            for i in range(n):
                fi = 1 if L.degenerate[i] else 0
                # x_i a u_{x_i x_i}
                add(col, shifted([(i, fi - 2)]), cst(L.a[i]) * e[i] * (e[i] - 1))
                add(col, shifted([(i, -1)]), cst(L.b[i]) * e[i])
                for j in range(n):
                    fj = 1 if L.degenerate[j] else 0
                    coef = cst(L.atilde[i][j])
                    if i == j:
                        add(col, shifted([(i, fi + fj - 2)]), coef * e[i] * (e[i] - 1))
                    else:
                        add(col, shifted([(i, fi - 1), (j, fj - 1)]), coef * e[i] * e[j])
                for l in range(m):
                    add(col, shifted([(i, fi - 1), (n + l, -1)]), cst(L.c[i][l]) * e[i] * e[n + l])
            for k_ in range(m):
                add(col, shifted([(n + k_, -1)]), cst(L.e[k_]) * e[n + k_])
                for l in range(m):
                    coef = cst(L.d[k_][l])
                    if k_ == l:
                        add(col, shifted([(n + k_, -2)]), coef * e[n + k_] * (e[n + k_] - 1))
                    else:
                        add(col, shifted([(n + k_, -1), (n + l, -1)]), coef * e[n + k_] * e[n + l])
        return A

    def coefficients(self, t: float) -> np.ndarray:
        """Monomial coefficients of ``u(t, .)``."""
        if t == 0:
            return self.c0.copy()
        s = expm_taylor(float(t) * self.B) @ self.s0
        return s[:len(self.basis)]

    def __call__(self, t: float, env) -> np.ndarray:
        c = self.coefficients(t)
        shape = np.shape(next(iter(env[k] for k in self.names))) if self.names else ()
        out = np.zeros(shape)
        for k, v in zip(self.basis, c):
            if v == 0.0:
                continue
            term = np.full(shape, v)
            for name, p in zip(self.names, k):
                if p:
                    term = term * np.asarray(env[name], dtype=float) ** p
            out = out + term
        return out

    def expr(self, t: float) -> Expr:
        """``u(t, .)`` as an expression."""
        out: Expr = Num(0.0)
        for k, v in zip(self.basis, self.coefficients(t)):
            if v == 0.0:
                continue
            term: Expr = Num(float(v))
            for name, p in zip(self.names, k):
                if p:
                    term = el.mul(term, el.power(Var(name), p))
            out = el.add(out, term)
        return out


def _exponents(D: int, total: int):
    if D == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _exponents(D - 1, total - first):
            yield (first, *rest)


def polynomial_oracle(L: CoefficientSet, f, g=None, T: float = 1.0, d: int = 4) -> PolynomialOracle:
    """Exact evaluator for ``u_t = L u + g``, ``u(0) = f`` on ``[0, T]``."""
    if T <= 0:
        raise ValueError("T must be positive")
    return PolynomialOracle(L, f, g, d)
