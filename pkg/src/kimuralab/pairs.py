"""Pairwise Hölder-quotient maxima over scattered space-time nodes.

All routines reduce with ``max``, so the result does not depend on the
order in which blocks are visited.
"""
from __future__ import annotations

import numpy as np

from .geometry import pair_distance

UNIFORM = "uniform"


def _denominator(r: np.ndarray, alpha) -> np.ndarray:
    if isinstance(alpha, str):
        # sup over alpha in (0, 1) of 1 / r**alpha
        return np.minimum(r, 1.0)
    return r ** alpha


def check_alpha(alpha):
    if isinstance(alpha, str):
        if alpha != UNIFORM:
            raise ValueError(f"alpha must be in (0, 1) or {UNIFORM!r}, got {alpha!r}")
        return alpha
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return alpha


class Nodes:
    """Flattened node coordinates: ``t`` (N,), ``x`` (N, n), ``y`` (N, m)."""

    def __init__(self, t, x, y):
        self.t = np.asarray(t, dtype=float)
        self.x = np.asarray(x, dtype=float).reshape(len(self.t), -1)
        self.y = np.asarray(y, dtype=float).reshape(len(self.t), -1)
        self.sx = np.sqrt(self.x)

    def __len__(self):
        return len(self.t)

    def take(self, idx) -> "Nodes":
        return Nodes(self.t[idx], self.x[idx], self.y[idx])

    def distance(self, i, j) -> np.ndarray:
        return pair_distance(self.t[i], self.x[i], self.y[i],
                             self.t[j], self.x[j], self.y[j],
                             self.sx[i], self.sx[j])


def max_ratio_all(nodes: Nodes, values: np.ndarray, alpha, block: int = 256):
    """Exhaustive ``max |v_p - v_q| / rho(p, q)^alpha`` over node pairs.

    Returns ``(value, pair_count, (p, q))``.
    """
    v = np.asarray(values, dtype=float)
    N = len(v)
    best, arg, count = 0.0, (0, 0), 0
    for a in range(0, N, block):
        b = min(N, a + block)
        ii = np.arange(a, b)[:, None]
        jj = np.arange(a, N)[None, :]
        valid = jj > ii
        r = pair_distance(nodes.t[a:b, None], nodes.x[a:b, None, :], nodes.y[a:b, None, :],
                          nodes.t[None, a:], nodes.x[None, a:, :], nodes.y[None, a:, :],
                          nodes.sx[a:b, None, :], nodes.sx[None, a:, :])
        dv = np.abs(v[a:b, None] - v[None, a:])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(valid & (r > 0), dv / _denominator(r, alpha), 0.0)
        count += int(valid.sum())
        k = int(np.argmax(q))
        if q.flat[k] > best:
            best = float(q.flat[k])
            arg = (a + k // q.shape[1], a + k % q.shape[1])
    return best, count, arg


def max_ratio_pairs(nodes: Nodes, values: np.ndarray, alpha, p, q, block: int = 1 << 20):
    """``max |v_p - v_q| / rho^alpha`` over an explicit list of pairs."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    best, arg = 0.0, (0, 0)
    for a in range(0, len(p), block):
        pi, qi = p[a:a + block], q[a:a + block]
        r = nodes.distance(pi, qi)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(r > 0, np.abs(v[pi] - v[qi]) / _denominator(r, alpha), 0.0)
        if len(ratio):
            k = int(np.argmax(ratio))
            if ratio[k] > best:
                best, arg = float(ratio[k]), (int(pi[k]), int(qi[k]))
    return best, len(p), arg


def max_ratio_cross(nodes: Nodes, values: np.ndarray, alpha, left, right):
    """All pairs between two index sets (used for local refinement)."""
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    p = np.repeat(left, len(right))
    q = np.tile(right, len(left))
    keep = p != q
    return max_ratio_pairs(nodes, values, alpha, p[keep], q[keep])
