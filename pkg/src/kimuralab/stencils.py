"""One-dimensional finite-difference matrices on nonuniform node sets."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def fd_weights(z: float, x: np.ndarray, order: int) -> np.ndarray:
    """Fornberg weights: row ``k`` approximates the k-th derivative at ``z``."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((order + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def first_derivative(s: np.ndarray, low: str = "second", high: str = "second") -> sp.csr_matrix:
    """Central 3-point first derivative; one-sided rows at the two ends.

    ``low``/``high`` select the end stencils: ``"first"`` is the 2-point
    one-sided difference, ``"second"`` the 3-point one.
    """
    K = len(s)
    rows, cols, vals = [], [], []
    for j in range(K):
        if j == 0:
            idx = [0, 1] if low == "first" else [0, 1, 2]
        elif j == K - 1:
            idx = [K - 2, K - 1] if high == "first" else [K - 3, K - 2, K - 1]
        else:
            idx = [j - 1, j, j + 1]
        w = fd_weights(s[j], s[idx], 1)[1]
        rows += [j] * len(idx)
        cols += idx
        vals += list(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(K, K))


def second_derivative(s: np.ndarray) -> sp.csr_matrix:
    """Central 3-point second derivative; 4-point one-sided rows at the ends
    (3-point when only three nodes exist)."""
    K = len(s)
    width = 4 if K >= 4 else 3
    rows, cols, vals = [], [], []
    for j in range(K):
        if j == 0:
            idx = list(range(width))
        elif j == K - 1:
            idx = list(range(K - width, K))
        else:
            idx = [j - 1, j, j + 1]
        w = fd_weights(s[j], s[idx], 2)[2]
        rows += [j] * len(idx)
        cols += idx
        vals += list(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(K, K))


def one_sided_first(s: np.ndarray, direction: int) -> sp.csr_matrix:
    """2-point difference towards ``direction`` (+1 forward, -1 backward) in every row."""
    K = len(s)
    rows, cols, vals = [], [], []
    for j in range(K):
        k = j + direction
        if not 0 <= k < K:
            k = j - direction
        h = s[k] - s[j]
        rows += [j, j]
        cols += [j, k]
        vals += [-1.0 / h, 1.0 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(K, K))


def along_axis(op: sp.spmatrix, axis: int, shape: tuple) -> sp.csr_matrix:
    """Lift a 1-D operator on ``axis`` to the C-ordered tensor grid ``shape``."""
    out = None
    for k, size in enumerate(shape):
        f = op if k == axis else sp.identity(size, format="csr")
        out = f if out is None else sp.kron(out, f, format="csr")
    return out.tocsr()
