"""Differential geometry of a Lorentzian metric on a coordinate patch.

Curvature tensors, the geodesic exponential map, time-oriented orthonormal
frames, geodesic normal charts and the quadratic Taylor expansion of the
pulled-back metric.  Signature convention (+,-,...,-) throughout; |g| means
|det g|.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import jets
from .errors import (
    DomainError,
    EscapeError,
    FitError,
    RadiusError,
    SignatureError,
    StepError,
)

__all__ = [
    "Box",
    "MetricField",
    "Frame",
    "CurvaturePack",
    "NormalChart",
    "curvature",
    "exp_map",
    "inverse_exp",
    "normal_chart",
    "metric_taylor2",
    "load_metric",
    "write_table_metric",
    "MAGIC",
]

MAGIC = b"LSPEC-METRIC\x00\x00\x00\x00"


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))

    @property
    def scale(self) -> float:
        return float(np.min(self.hi - self.lo))

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo + margin) and np.all(x <= self.hi - margin))

    def margin_of(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(min(np.min(x - self.lo), np.min(self.hi - x)))


@dataclass(frozen=True)
class MetricField:
    """Smooth Lorentzian metric on a box patch, evaluable with derivatives.

    ``fn`` maps a length-n sequence of coordinate objects (floats, numpy
    arrays, or Taylor jets) to an n x n nested list of components.  Analytic
    metrics keep ``jet_capable=True`` and get exact derivatives through
    Taylor-mode differentiation; tabulated metrics fall back to 4th-order
    central finite differences with step 1e-3 * patch scale.
    """

    dim: int
    fn: Callable
    patch: Box
    name: str = "custom"
    deriv_order: int = 4
    jet_capable: bool = True

    def eval(self, x):
        """Metric components at a point (n,) or batch (B,n)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        coords = [X[:, i] for i in range(self.dim)]
        rows = self.fn(coords)
        B = X.shape[0]
        g = np.empty((B, self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                g[:, i, j] = rows[i][j]
        return g[0] if single else g

    @property
    def fd_step(self) -> float:
        return 1e-3 * self.patch.scale

    def derivatives(self, x):
        """g, dg, d2g at points x (B,n); exact for analytic metrics."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if self.jet_capable:
            return jets.metric_derivatives(self.fn, X, self.dim)
        return self._fd_derivatives(X)

    def derivatives1(self, x):
        """g and dg only (cheaper inner loop for geodesic integration)."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if self.jet_capable:
            return jets.metric_first_derivatives(self.fn, X, self.dim)
        g, dg, _ = self._fd_derivatives(X)
        return g, dg

    def _fd_derivatives(self, X):
        n, h = self.dim, self.fd_step
        B = X.shape[0]
        g = self.eval(X)
        dg = np.empty((B, n, n, n))
        d2g = np.empty((B, n, n, n, n))
        eye = np.eye(n)
        evals = {}

        def ev(mult_k):
            key = tuple(mult_k)
            if key not in evals:
                evals[key] = self.eval(X + h * (eye.T @ np.asarray(mult_k)))
            return evals[key]

        for k in range(n):
            m = np.zeros(n)
            gs = []
            for s in (-2, -1, 1, 2):
                m[k] = s
                gs.append(ev(m.copy()))
            dg[:, k] = (gs[0] - 8 * gs[1] + 8 * gs[2] - gs[3]) / (12 * h)
            d2g[:, k, k] = (-gs[0] + 16 * gs[1] - 30 * g + 16 * gs[2] - gs[3]) / (12 * h * h)
        for k in range(n):
            for l in range(k + 1, n):
                m = np.zeros(n)
                acc = np.zeros_like(g)
                for sk, sl, w in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                    m[:] = 0
                    m[k], m[l] = sk, sl
                    acc = acc + w * ev(m.copy())
                mixed = acc / (4 * h * h)
                d2g[:, k, l] = mixed
                d2g[:, l, k] = mixed
        return g, dg, d2g

    def derivative(self, x, idx):
        """Partial derivative of g for a multi-index tuple, order <= deriv_order."""
        idx = tuple(idx)
        order = len(idx)
        if order > self.deriv_order:
            raise DomainError(f"derivative order {order} exceeds deriv_order={self.deriv_order}")
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.eval(x)
        if order <= 2:
            g, dg, d2g = self.derivatives(x[None, :])
            return dg[0, idx[0]] if order == 1 else d2g[0, idx[0], idx[1]]
        # orders 3-4: central differences of the exact order-2 jets
        h = self.fd_step
        e = np.zeros(self.dim)
        e[idx[0]] = 1.0
        lo = self.derivative(x - h * e, idx[1:])
        hi = self.derivative(x + h * e, idx[1:])
        return (hi - lo) / (2 * h)

    def check_signature(self, x):
        g = self.eval(np.asarray(x, dtype=float))
        if g.ndim == 3:
            g = g[0]
        if not np.allclose(g, g.T, atol=1e-12 * max(1.0, float(np.abs(g).max()))):
            raise SignatureError("metric not symmetric at sampled point")
        ev = np.linalg.eigvalsh(g)
        if not (np.sum(ev > 0) == 1 and np.sum(ev < 0) == self.dim - 1):
            raise SignatureError(f"metric signature is not (1,{self.dim - 1}) at {x}")


@dataclass(frozen=True)
class Frame:
    """g-orthonormal frame e_0..e_{n-1} at a point, e_0 future-directed."""

    base: np.ndarray
    vectors: np.ndarray  # columns e_mu

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "vectors", np.asarray(self.vectors, dtype=float))


@dataclass(frozen=True)
class CurvaturePack:
    riemann: np.ndarray  # fully lowered R[i,j,k,l]
    ricci: np.ndarray
    scalar: float


def minkowski_eta(n):
    eta = -np.eye(n)
    eta[0, 0] = 1.0
    return eta


# ---------------------------------------------------------------------------
# Christoffel symbols and curvature


def christoffel_batch(metric: MetricField, X):
    """Gamma[b,i,j,k] at points X (B,n)."""
    g, dg = metric.derivatives1(X)
    ginv = np.linalg.inv(g)
    # dg[b,k,i,j] = d_k g_ij
    term = np.einsum("bjlk->bljk", dg) + np.einsum("bklj->bljk", dg) - dg
    return 0.5 * np.einsum("bil,bljk->bijk", ginv, term)


def curvature(metric: MetricField, x) -> CurvaturePack:
    """Riemann, Ricci and scalar curvature from two derivatives of g."""
    x = np.asarray(x, dtype=float)
    stencil = 2 * metric.fd_step if not metric.jet_capable else 4 * metric.fd_step
    if not metric.patch.contains(x, margin=stencil):
        raise DomainError(f"point {x} too close to the patch boundary for differentiation")
    metric.check_signature(x)
    g, dg, d2g = metric.derivatives(x[None, :])
    g, dg, d2g = g[0], dg[0], d2g[0]
    ginv = np.linalg.inv(g)

    # Gamma^i_jk and its coordinate derivative
    term = np.einsum("jlk->ljk", dg) + np.einsum("klj->ljk", dg) - dg
    gamma = 0.5 * np.einsum("il,ljk->ijk", ginv, term)
    dginv = -np.einsum("ia,mab,bl->mil", ginv, dg, ginv)
    dterm = (
        np.einsum("mjlk->mljk", d2g)
        + np.einsum("mklj->mljk", d2g)
        - np.einsum("mljk->mljk", d2g)
    )
    dgamma = 0.5 * np.einsum("mil,ljk->mijk", dginv, term) + 0.5 * np.einsum(
        "il,mljk->mijk", ginv, dterm
    )

    # R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj
    riem_up = (
        np.einsum("kilj->ijkl", dgamma)
        - np.einsum("likj->ijkl", dgamma)
        + np.einsum("ikm,mlj->ijkl", gamma, gamma)
        - np.einsum("ilm,mkj->ijkl", gamma, gamma)
    )
    # orientation: R is signed so that the pulled-back metric in normal
    # coordinates expands as g_ij = eta_ij + (1/3) R[i,k,j,l] y^k y^l
    riemann = -np.einsum("ia,ajkl->ijkl", g, riem_up)
    ricci = np.einsum("kjkl->jl", riem_up)
    scalar = float(np.einsum("jl,jl->", ginv, ricci))
    return CurvaturePack(riemann=riemann, ricci=ricci, scalar=scalar)


# ---------------------------------------------------------------------------
# Geodesics


def _geodesic_rhs(metric, t, y):
    n = metric.dim
    x, u = y[:n], y[n:]
    gamma = christoffel_batch(metric, x[None, :])[0]
    acc = -np.einsum("ijk,j,k->i", gamma, u, u)
    return np.concatenate([u, acc])


def exp_map(metric: MetricField, x, v, path_samples: Optional[int] = None):
    """Endpoint of the geodesic with initial data (x, v) at parameter 1.

    Adaptive RK45 at absolute/relative tolerance 1e-10.  Raises EscapeError
    if the geodesic exits the patch, StepError if the integrator fails.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    n = metric.dim
    if not metric.patch.contains(x):
        raise DomainError(f"base point {x} outside patch")

    def escape(t, y):
        return metric.patch.margin_of(y[:n])

    escape.terminal = True
    escape.direction = -1

    sol = solve_ivp(
        lambda t, y: _geodesic_rhs(metric, t, y),
        (0.0, 1.0),
        np.concatenate([x, v]),
        method="RK45",
        rtol=1e-10,
        atol=1e-10,
        events=escape,
        dense_output=path_samples is not None,
    )
    if sol.status == 1:
        raise EscapeError(f"geodesic from {x} with v={v} left the patch at t={sol.t[-1]:.4f}")
    if sol.status != 0:
        raise StepError(f"geodesic integrator failed: {sol.message}")
    end = sol.y[:n, -1]
    if path_samples is not None:
        ts = np.linspace(0.0, 1.0, path_samples)
        return end, sol.sol(ts)[:n].T
    return end


def _geodesic_batch(metric: MetricField, x0, V, nsteps: int = 16):
    """Endpoints of geodesics from x0 with a batch of velocities V (B,n).

    Fixed-step classical RK4; for the short chart geodesics the local error
    scales like (|v|/nsteps)^5, and accuracy is validated once per chart
    against the adaptive integrator (see normal_chart).
    """
    B, n = V.shape
    X = np.broadcast_to(np.asarray(x0, dtype=float), (B, n)).copy()
    U = np.asarray(V, dtype=float).copy()
    h = 1.0 / nsteps

    def rhs(X, U):
        gamma = christoffel_batch(metric, X)
        return U, -np.einsum("bijk,bj,bk->bi", gamma, U, U)

    for _ in range(nsteps):
        k1x, k1u = rhs(X, U)
        k2x, k2u = rhs(X + 0.5 * h * k1x, U + 0.5 * h * k1u)
        k3x, k3u = rhs(X + 0.5 * h * k2x, U + 0.5 * h * k2u)
        k4x, k4u = rhs(X + h * k3x, U + h * k3u)
        X = X + (h / 6) * (k1x + 2 * k2x + 2 * k3x + k4x)
        U = U + (h / 6) * (k1u + 2 * k2u + 2 * k3u + k4u)
    if not np.all(np.isfinite(X)):
        raise StepError("batched geodesic integration produced non-finite points")
    lo, hi = metric.patch.lo, metric.patch.hi
    if np.any(X < lo) or np.any(X > hi):
        raise EscapeError("a batched geodesic left the patch")
    return X


def inverse_exp(metric: MetricField, x, p, tol: float = 1e-9, max_iter: int = 40):
    """Damped Newton shooting for v with exp(x, v) = p; flat-metric initial guess."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    n = metric.dim
    v = p - x
    h = 1e-6 * max(1.0, float(np.linalg.norm(v)))
    for _ in range(max_iter):
        r = exp_map(metric, x, v) - p
        if np.linalg.norm(r) < tol:
            return v
        J = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            J[:, i] = (exp_map(metric, x, v + e) - exp_map(metric, x, v - e)) / (2 * h)
        step = np.linalg.solve(J, r)
        lam = 1.0
        base = np.linalg.norm(r)
        while lam > 1e-4:
            if np.linalg.norm(exp_map(metric, x, v - lam * step) - p) < base:
                break
            lam *= 0.5
        v = v - lam * step
    raise StepError(f"inverse exponential did not converge at {p}")


# ---------------------------------------------------------------------------
# Frames and normal charts


def frame_at(metric: MetricField, x) -> Frame:
    """Time-oriented g-orthonormal frame by Gram-Schmidt, time axis first."""
    x = np.asarray(x, dtype=float)
    metric.check_signature(x)
    g = metric.eval(x)
    n = metric.dim
    vecs = np.eye(n)
    out = np.empty((n, n))
    # timelike leg
    v0 = vecs[:, 0]
    n0 = float(v0 @ g @ v0)
    if n0 <= 0:
        raise SignatureError("declared time axis is not timelike at the base point")
    e0 = v0 / np.sqrt(n0)
    if e0[0] < 0:
        e0 = -e0
    out[:, 0] = e0
    signs = [1.0]
    for i in range(1, n):
        w = vecs[:, i].astype(float)
        for j in range(i):
            coef = float(w @ g @ out[:, j]) / signs[j]
            w = w - coef * out[:, j]
        nw = float(w @ g @ w)
        if nw >= 0:
            raise SignatureError("Gram-Schmidt produced a non-spacelike leg")
        out[:, i] = w / np.sqrt(-nw)
        signs.append(-1.0)
    return Frame(base=x, vectors=out)


class NormalChart:
    """Geodesic normal coordinates at a base point.

    ``pulled_metric(y)`` returns the components of the metric at
    exp(base, y^mu e_mu) in the frame of Jacobian vectors of the exponential
    map (Jacobian by central finite differences of exp_map), so that
    g_tilde(0) = eta exactly up to frame orthonormality and the radial
    identity g_tilde_{jk}(y) y^k = eta_{jk} y^k holds.
    """

    def __init__(self, metric: MetricField, base, frame: Frame, radius: float):
        self.metric = metric
        self.base = np.asarray(base, dtype=float)
        self.frame = frame
        self.radius = float(radius)
        self._h = 1e-5 * max(self.radius, 1e-3)

    def to_manifold(self, Y):
        """Points exp(base, y^mu e_mu) for normal coordinates Y (B,n)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        V = Y @ self.frame.vectors.T
        return _geodesic_batch(self.metric, self.base, V)

    def pulled_metric(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        B, n = Y.shape
        if np.any(np.linalg.norm(Y, axis=1) > self.radius * (1 + 1e-12)):
            raise DomainError("normal coordinates outside the chart ball")
        zero_rows = np.linalg.norm(Y, axis=1) == 0.0
        h = self._h
        # batch: center + 2n shifted evaluations
        shifts = [Y]
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            shifts.append(Y + e)
            shifts.append(Y - e)
        pts = self.to_manifold(np.vstack(shifts))
        center = pts[:B]
        g = self.metric.eval(center)
        J = np.empty((B, n, n))  # J[:, :, i] = d(exp)/d y_i
        for i in range(n):
            plus = pts[(1 + 2 * i) * B : (2 + 2 * i) * B]
            minus = pts[(2 + 2 * i) * B : (3 + 2 * i) * B]
            J[:, :, i] = (plus - minus) / (2 * h)
        gt = np.einsum("bai,bac,bcj->bij", J, g, J)
        if np.any(zero_rows):
            # at the origin the Jacobian is the frame itself; use it exactly
            E = self.frame.vectors
            g0 = self.metric.eval(self.base)
            gt[zero_rows] = E.T @ g0 @ E
        return gt

    def density(self, Y):
        """|det g_tilde(y)|^(1/2)."""
        gt = self.pulled_metric(Y)
        return np.sqrt(np.abs(np.linalg.det(gt)))

    def eta(self):
        return minkowski_eta(self.metric.dim)


def normal_chart(metric: MetricField, base, radius: Optional[float] = None, seed: int = 0) -> NormalChart:
    """Construct a normal chart; verifies invertibility of the exponential
    Jacobian on a sample grid and halves the radius on failure."""
    base = np.asarray(base, dtype=float)
    if not metric.patch.contains(base):
        raise DomainError(f"base point {base} outside patch")
    frame = frame_at(metric, base)
    margin = metric.patch.margin_of(base)
    r_req = radius
    r = 0.1 * metric.patch.scale if radius is None else float(radius)
    r = min(r, 0.8 * margin / max(1.0, float(np.abs(frame.vectors).max())))
    rng = np.random.default_rng(seed)
    n = metric.dim
    for _ in range(7):
        chart = NormalChart(metric, base, frame, r)
        dirs = rng.normal(size=(16, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        Y = dirs * rng.uniform(0.3, 1.0, size=(16, 1)) * r
        try:
            gt = chart.pulled_metric(Y)
        except (EscapeError, StepError):
            r *= 0.5
            continue
        dets = np.abs(np.linalg.det(gt))
        if np.all(np.isfinite(gt)) and np.all(dets > 0.2) and np.all(dets < 5.0):
            # one-shot validation of the batched integrator against the adaptive one
            v = chart.frame.vectors @ (0.7 * r * dirs[0])
            adaptive = exp_map(metric, base, v)
            batched = _geodesic_batch(metric, base, v[None, :])[0]
            if np.linalg.norm(adaptive - batched) > 1e-8 * (1 + np.linalg.norm(adaptive)):
                raise StepError("batched geodesic integrator disagrees with adaptive RK45")
            if r_req is not None and r < r_req * 0.999:
                raise RadiusError(
                    f"requested radius {r_req} exceeds verified injectivity margin {r}"
                )
            return chart
        r *= 0.5
    raise RadiusError("could not verify an injectivity margin for the normal chart")


def metric_taylor2(chart: NormalChart, rel_step: float = 0.05, tol: float = 1e-3):
    """Quadratic jet of the pulled-back metric at 0 by least squares.

    Returns C[i,j,k,l], symmetric in (k,l), with
    g_tilde_ij(y) = eta_ij + C[i,j,k,l] y^k y^l + O(|y|^3).
    Richardson extrapolation over two stencil radii removes the O(h^2) bias.
    """
    n = chart.metric.dim
    eta = chart.eta()

    def fit(h0):
        ys = []
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            ys.append(h0 * e)
            ys.append(-h0 * e)
        for k in range(n):
            for l in range(k + 1, n):
                e = np.zeros(n)
                e[k], e[l] = 1.0, 1.0
                ys.append(h0 * e / np.sqrt(2))
                ys.append(-h0 * e / np.sqrt(2))
                e[l] = -1.0
                ys.append(h0 * e / np.sqrt(2))
                ys.append(-h0 * e / np.sqrt(2))
        Y = np.array(ys)
        G = chart.pulled_metric(Y) - eta[None, :, :]
        # design matrix over the n(n+1)/2 monomials y_k y_l, k <= l
        mons = [(k, l) for k in range(n) for l in range(k, n)]
        A = np.stack([Y[:, k] * Y[:, l] * (1.0 if k == l else 2.0) for (k, l) in mons], axis=1)
        C = np.zeros((n, n, n, n))
        resmax = 0.0
        for i in range(n):
            for j in range(i, n):
                coef, res, *_ = np.linalg.lstsq(A, G[:, i, j], rcond=None)
                for (k, l), c in zip(mons, coef):
                    C[i, j, k, l] = c
                    C[i, j, l, k] = c
                    C[j, i, k, l] = c
                    C[j, i, l, k] = c
                pred = A @ coef
                resmax = max(resmax, float(np.max(np.abs(pred - G[:, i, j]))))
        return C, resmax

    h0 = rel_step * chart.radius
    C1, r1 = fit(h0)
    C2, r2 = fit(h0 / 2)
    C = (4.0 * C2 - C1) / 3.0
    scale = max(1.0, float(np.abs(C).max())) * h0 * h0
    if max(r1, r2) > tol * max(scale, 1e-12) + 1e-9:
        raise FitError(f"quadratic jet residual {max(r1, r2):.2e} exceeds tolerance")
    return C


# ---------------------------------------------------------------------------
# Built-in metrics and the coefficient-table format


def _const_rows(diag_entries, coords):
    n = len(diag_entries)
    one = coords[0] * 0 + 1.0
    rows = [[one * 0.0 for _ in range(n)] for _ in range(n)]
    for i, d in enumerate(diag_entries):
        rows[i][i] = one * d
    return rows


def make_minkowski(n: int = 4, half_width: float = 12.0) -> MetricField:
    def fn(coords):
        return _const_rows([1.0] + [-1.0] * (n - 1), coords)

    box = Box(lo=-half_width * np.ones(n), hi=half_width * np.ones(n))
    return MetricField(dim=n, fn=fn, patch=box, name="minkowski")


def make_ultrastatic_torus(side: float = 2 * np.pi) -> MetricField:
    m = make_minkowski(4, half_width=max(6.0, side))
    return MetricField(dim=4, fn=m.fn, patch=m.patch, name="ultrastatic-torus")


def make_ultrastatic_sphere(radius: float = 1.0) -> MetricField:
    """dt^2 minus the round 3-sphere metric of the given radius, polar chart
    (t, chi, theta, phi)."""

    def fn(coords):
        t, chi, theta, phi = coords
        one = t * 0 + 1.0
        zero = one * 0.0
        r2 = radius * radius
        s_chi = jets.sin(chi)
        s_theta = jets.sin(theta)
        g11 = one * (-r2)
        g22 = -r2 * s_chi * s_chi
        g33 = -r2 * s_chi * s_chi * s_theta * s_theta
        return [
            [one, zero, zero, zero],
            [zero, g11, zero, zero],
            [zero, zero, g22, zero],
            [zero, zero, zero, g33],
        ]

    box = Box(
        lo=np.array([-4.0, 0.35, 0.35, -2.4]),
        hi=np.array([4.0, np.pi - 0.35, np.pi - 0.35, 2.4]),
    )
    return MetricField(dim=4, fn=fn, patch=box, name="ultrastatic-sphere")


def make_expanding() -> MetricField:
    """dt^2 - e^(2t) (dx^2 + dy^2 + dz^2)."""

    def fn(coords):
        t = coords[0]
        one = t * 0 + 1.0
        zero = one * 0.0
        a = jets.exp(2.0 * t)
        return [
            [one, zero, zero, zero],
            [zero, -a, zero, zero],
            [zero, zero, -a, zero],
            [zero, zero, zero, -a],
        ]

    box = Box(lo=np.array([-2.5, -6.0, -6.0, -6.0]), hi=np.array([2.5, 6.0, 6.0, 6.0]))
    return MetricField(dim=4, fn=fn, patch=box, name="expanding")


BUILTIN_BASEPOINTS = {
    "minkowski": np.zeros(4),
    "ultrastatic-torus": np.zeros(4),
    "ultrastatic-sphere": np.array([0.0, np.pi / 2, np.pi / 2, 0.0]),
    "expanding": np.zeros(4),
}


def load_metric(spec: str) -> MetricField:
    """Resolve a metric name ('minkowski', 'ultrastatic-sphere[:r]',
    'ultrastatic-torus[:L]', 'expanding') or a coefficient-table file path."""
    parts = spec.split(":")
    name = parts[0]
    if name == "minkowski":
        return make_minkowski()
    if name == "ultrastatic-torus":
        return make_ultrastatic_torus(float(parts[1]) if len(parts) > 1 else 2 * np.pi)
    if name == "ultrastatic-sphere":
        return make_ultrastatic_sphere(float(parts[1]) if len(parts) > 1 else 1.0)
    if name == "expanding":
        return make_expanding()
    return load_table_metric(spec)


def write_table_metric(path: str, box: Box, dims, samples, binary: bool = True):
    """Write a coefficient-table metric: g_{mu nu} samples on a regular grid,
    row-major, with the 16-byte magic header in binary mode."""
    dims = [int(d) for d in dims]
    n = len(dims)
    data = np.asarray(samples, dtype=float)
    if data.shape != tuple(dims) + (n, n):
        raise ValueError(f"samples shape {data.shape} does not match dims {dims}")
    if binary:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", n))
            f.write(struct.pack(f"<{n}I", *dims))
            f.write(np.asarray(box.lo, dtype="<f8").tobytes())
            f.write(np.asarray(box.hi, dtype="<f8").tobytes())
            f.write(data.astype("<f8").tobytes())
    else:
        with open(path, "w") as f:
            f.write("LSPEC-METRIC text\n")
            f.write(f"n {n}\n")
            f.write("dims " + " ".join(map(str, dims)) + "\n")
            f.write("lo " + " ".join(f"{float(v):.17g}" for v in box.lo) + "\n")
            f.write("hi " + " ".join(f"{float(v):.17g}" for v in box.hi) + "\n")
            np.savetxt(f, data.reshape(-1, n * n))


def load_table_metric(path: str) -> MetricField:
    with open(path, "rb") as f:
        head = f.read(16)
    if head == MAGIC:
        with open(path, "rb") as f:
            f.read(16)
            n = struct.unpack("<I", f.read(4))[0]
            dims = struct.unpack(f"<{n}I", f.read(4 * n))
            lo = np.frombuffer(f.read(8 * n), dtype="<f8")
            hi = np.frombuffer(f.read(8 * n), dtype="<f8")
            count = int(np.prod(dims)) * n * n
            data = np.frombuffer(f.read(8 * count), dtype="<f8").reshape(tuple(dims) + (n, n))
    elif head.startswith(b"LSPEC-METRIC"):
        with open(path) as f:
            lines = f.read().split("\n")
        n = int(lines[1].split()[1])
        dims = tuple(int(v) for v in lines[2].split()[1:])
        lo = np.array([float(v) for v in lines[3].split()[1:]])
        hi = np.array([float(v) for v in lines[4].split()[1:]])
        body = "\n".join(lines[5:])
        if not body.strip():
            raise DomainError("empty table metric file")
        data = np.array([float(tok) for tok in body.split()]).reshape(tuple(dims) + (n, n))
    else:
        raise DomainError(f"{path}: not an LSPEC metric table (bad magic)")

    from scipy.interpolate import RegularGridInterpolator

    axes = [np.linspace(lo[i], hi[i], dims[i]) for i in range(n)]
    method = "cubic" if min(dims) >= 4 else "linear"
    interps = [
        [RegularGridInterpolator(axes, data[..., i, j], method=method) for j in range(n)]
        for i in range(n)
    ]

    def fn(coords):
        pts = np.stack([np.asarray(c, dtype=float) for c in coords], axis=-1)
        return [[interps[i][j](pts) for j in range(n)] for i in range(n)]

    return MetricField(
        dim=n, fn=fn, patch=Box(lo=lo, hi=hi), name=path, jet_capable=False
    )
