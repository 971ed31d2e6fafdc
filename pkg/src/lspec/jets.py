"""Truncated Taylor-series arithmetic (forward-mode jets).

Metric components are written as ordinary numpy expressions; feeding them
Taylor objects seeded along a direction yields exact directional derivatives
up to the truncation order.  Mixed partials come from polarization:

    d_k d_l f = ( D^2_{e_k+e_l} f - D^2_{e_k-e_l} f ) / 4 .

Coefficients may be scalars or numpy arrays, so a single pass differentiates
a whole batch of base points.
"""
from __future__ import annotations

import numpy as np

__all__ = ["Taylor", "sin", "cos", "exp", "sqrt", "log", "seed", "metric_derivatives"]


class Taylor:
    """Truncated Taylor series sum_k c[k] s^k with array-valued coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = [np.asarray(x, dtype=float) for x in coeffs]

    @property
    def order(self):
        return len(self.c) - 1

    def _coerce(self, other):
        if isinstance(other, Taylor):
            return other
        z = np.zeros_like(self.c[0])
        return Taylor([np.asarray(other, dtype=float)] + [z] * self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return Taylor([a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Taylor([-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor([a * other for a in self.c])
        p = self.order
        out = []
        for k in range(p + 1):
            s = self.c[0] * other.c[k]
            for j in range(1, k + 1):
                s = s + self.c[j] * other.c[k - j]
            out.append(s)
        return Taylor(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor([a / other for a in self.c])
        p = self.order
        out = [self.c[0] / other.c[0]]
        for k in range(1, p + 1):
            s = self.c[k]
            for j in range(1, k + 1):
                s = s - other.c[j] * out[k - j]
            out.append(s / other.c[0])
        return Taylor(out)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, q):
        if isinstance(q, int) and q >= 0:
            r = Taylor([np.ones_like(self.c[0])] + [np.zeros_like(self.c[0])] * self.order)
            for _ in range(q):
                r = r * self
            return r
        return exp(log(self) * float(q))


def _lift(x, like):
    if isinstance(x, Taylor):
        return x
    return like._coerce(x)


def sin(x):
    if not isinstance(x, Taylor):
        return np.sin(x)
    p = x.order
    s = [np.sin(x.c[0])]
    c = [np.cos(x.c[0])]
    for k in range(1, p + 1):
        sk = sum(j * x.c[j] * c[k - j] for j in range(1, k + 1)) / k
        ck = -sum(j * x.c[j] * s[k - j] for j in range(1, k + 1)) / k
        s.append(sk)
        c.append(ck)
    return Taylor(s)


def cos(x):
    if not isinstance(x, Taylor):
        return np.cos(x)
    p = x.order
    s = [np.sin(x.c[0])]
    c = [np.cos(x.c[0])]
    for k in range(1, p + 1):
        sk = sum(j * x.c[j] * c[k - j] for j in range(1, k + 1)) / k
        ck = -sum(j * x.c[j] * s[k - j] for j in range(1, k + 1)) / k
        s.append(sk)
        c.append(ck)
    return Taylor(c)


def exp(x):
    if not isinstance(x, Taylor):
        return np.exp(x)
    p = x.order
    e = [np.exp(x.c[0])]
    for k in range(1, p + 1):
        e.append(sum(j * x.c[j] * e[k - j] for j in range(1, k + 1)) / k)
    return Taylor(e)


def log(x):
    if not isinstance(x, Taylor):
        return np.log(x)
    p = x.order
    l = [np.log(x.c[0])]
    for k in range(1, p + 1):
        s = x.c[k]
        for j in range(1, k):
            s = s - (j / k) * l[j] * x.c[k - j]
        l.append(s / x.c[0])
    return Taylor(l)


def sqrt(x):
    if not isinstance(x, Taylor):
        return np.sqrt(x)
    p = x.order
    r = [np.sqrt(x.c[0])]
    for k in range(1, p + 1):
        s = x.c[k]
        for j in range(1, k):
            s = s - r[j] * r[k - j]
        r.append(s / (2 * r[0]))
    return Taylor(r)


def seed(x, v, order):
    """Coordinate jets for base points x (B,n) along direction v (n,)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    zeros = np.zeros(x.shape[0])
    out = []
    for i in range(n):
        c = [x[:, i], np.full(x.shape[0], float(v[i]))] + [zeros] * (order - 1)
        out.append(Taylor(c))
    return out


def metric_first_derivatives(metric_fn, x, n):
    """Exact g (B,n,n) and dg (B,n,n,n), dg[:,k,i,j]=d_k g_ij, via order-1 jets.

    All n seed directions are stacked into one metric evaluation on (n,B)
    coefficient arrays, so the cost is a single vectorized pass.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    B = x.shape[0]
    base = np.broadcast_to(x.T[:, None, :], (n, n, B))  # coord i, dir k, batch
    vel = np.broadcast_to(np.eye(n)[:, :, None], (n, n, B))
    coords = [Taylor([base[i].copy(), vel[:, i].copy()]) for i in range(n)]
    rows = metric_fn(coords)
    g = np.empty((B, n, n))
    dg = np.empty((B, n, n, n))
    for i in range(n):
        for j in range(n):
            e = rows[i][j]
            if isinstance(e, Taylor):
                c0 = np.broadcast_to(e.c[0], (n, B))
                c1 = np.broadcast_to(e.c[1], (n, B))
                g[:, i, j] = c0[0]
                dg[:, :, i, j] = c1.T
            else:
                g[:, i, j] = np.broadcast_to(e, (n, B))[0]
                dg[:, :, i, j] = 0.0
    return g, dg


def metric_derivatives(metric_fn, x, n):
    """Exact g, dg, d2g for a jet-capable metric function at points x (B,n).

    Returns g (B,n,n), dg (B,n,n,n) with dg[:,k,i,j]=d_k g_ij, and
    d2g (B,n,n,n,n) with d2g[:,k,l,i,j]=d_k d_l g_ij.  Mixed partials come
    from polarization; all seeds run in one stacked evaluation.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    B = x.shape[0]
    eye = np.eye(n)
    dirs = [eye[k] for k in range(n)]
    pairs = [(k, l) for k in range(n) for l in range(k + 1, n)]
    for k, l in pairs:
        dirs.append(eye[k] + eye[l])
        dirs.append(eye[k] - eye[l])
    D = len(dirs)
    dirs = np.array(dirs)  # (D, n)

    base = np.broadcast_to(x.T[:, None, :], (n, D, B))
    vel = np.broadcast_to(dirs.T[:, :, None], (n, D, B))
    zero = np.zeros((D, B))
    coords = [Taylor([base[i].copy(), vel[i].copy(), zero]) for i in range(n)]
    rows = metric_fn(coords)

    g = np.empty((B, n, n))
    c1 = np.empty((D, B, n, n))
    c2 = np.empty((D, B, n, n))
    for i in range(n):
        for j in range(n):
            e = rows[i][j]
            if isinstance(e, Taylor):
                g[:, i, j] = np.broadcast_to(e.c[0], (D, B))[0]
                c1[:, :, i, j] = np.broadcast_to(e.c[1], (D, B))
                c2[:, :, i, j] = 2.0 * np.broadcast_to(e.c[2], (D, B))
            else:
                g[:, i, j] = np.broadcast_to(e, (D, B))[0]
                c1[:, :, i, j] = 0.0
                c2[:, :, i, j] = 0.0

    dg = np.moveaxis(c1[:n], 0, 1)  # (B, n, n, n)
    d2g = np.empty((B, n, n, n, n))
    for k in range(n):
        d2g[:, k, k] = c2[k]
    for idx, (k, l) in enumerate(pairs):
        gp = c2[n + 2 * idx]
        gm = c2[n + 2 * idx + 1]
        mixed = (gp - gm) / 4.0
        d2g[:, k, l] = mixed
        d2g[:, l, k] = mixed
    return g, dg, d2g
