"""Tensor-product Chebyshev collocation models on a box.

Smooth fields pulled back through the exponential map are expensive to
evaluate (each point costs several geodesic solves).  Fitting them once at
tensor Chebyshev-Gauss nodes gives a spectrally accurate polynomial model
that can be evaluated and differentiated cheaply and exactly thereafter.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as C

__all__ = ["cheb_nodes", "ChebModel"]


def cheb_nodes(deg, a):
    """Chebyshev-Gauss nodes of T_{deg+1} scaled to [-a, a]."""
    k = np.arange(deg + 1)
    return a * np.cos((2 * k + 1) * np.pi / (2 * (deg + 1)))


def _value_to_coeff_matrix(deg):
    # exact inverse of the Chebyshev Vandermonde at Chebyshev-Gauss nodes
    N = deg + 1
    theta = (2 * np.arange(N) + 1) * np.pi / (2 * N)
    j = np.arange(N)[:, None]
    M = (2.0 / N) * np.cos(j * theta[None, :])
    M[0] *= 0.5
    return M


class ChebModel:
    """Polynomial model of a smooth function on the box [-a, a]^n."""

    def __init__(self, coeffs, a):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.a = float(a)
        self.n = self.coeffs.ndim

    @classmethod
    def fit(cls, fn, n, deg, a):
        """Collocate fn at the tensor Chebyshev grid; fn maps (B,n) -> (B,)."""
        nodes = cheb_nodes(deg, a)
        grids = np.meshgrid(*([nodes] * n), indexing="ij")
        pts = np.stack([gr.ravel() for gr in grids], axis=-1)
        vals = np.asarray(fn(pts), dtype=float).reshape([deg + 1] * n)
        M = _value_to_coeff_matrix(deg)
        coeffs = vals
        for axis in range(n):
            coeffs = np.tensordot(M, coeffs, axes=([1], [axis]))
            coeffs = np.moveaxis(coeffs, 0, axis)
        return cls(coeffs, a)

    @classmethod
    def from_values(cls, vals, a):
        vals = np.asarray(vals, dtype=float)
        deg = vals.shape[0] - 1
        M = _value_to_coeff_matrix(deg)
        coeffs = vals
        for axis in range(vals.ndim):
            coeffs = np.tensordot(M, coeffs, axes=([1], [axis]))
            coeffs = np.moveaxis(coeffs, 0, axis)
        return cls(coeffs, a)

    def __call__(self, x, chunk: int = 16384):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape[0])
        for start in range(0, x.shape[0], chunk):
            out[start : start + chunk] = self._eval_block(x[start : start + chunk])
        return out

    def _eval_block(self, x):
        t = x / self.a
        shape = self.coeffs.shape
        B = x.shape[0]
        # axis 0 as a plain GEMM, remaining axes as batched GEMMs
        V = C.chebvander(t[:, 0], shape[0] - 1)
        res = V @ self.coeffs.reshape(shape[0], -1)  # (B, rest)
        for axis in range(1, self.n):
            N = shape[axis]
            V = C.chebvander(t[:, axis], N - 1)  # (B, N)
            res = np.matmul(V[:, None, :], res.reshape(B, N, -1))[:, 0, :]
        return res[:, 0]

    def derivative(self, axis):
        """Exact partial derivative model along the given axis."""
        c = np.moveaxis(self.coeffs, axis, 0)
        d = C.chebder(c) / self.a
        if d.shape[0] == 0:
            d = np.zeros((1,) + c.shape[1:])
        d = np.moveaxis(d, 0, axis)
        return ChebModel(d, self.a)
