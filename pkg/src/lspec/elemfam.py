"""The elementary Lorentz-invariant family F_alpha(z, q) on R^n.

Diagonal values (q = 0) come from the Gamma closed form obtained by rotating
the defining momentum integral to its Euclidean counterpart:

    F_alpha(z, 0) = +- i (4 pi)^(-n/2) Gamma(alpha+1-n/2) (-z)^(n/2-alpha-1),

with + for Im z > 0 (and the boundary value from above on the reals) and
- for Im z < 0; the two halves are related by conjugation of the defining
integral.  Off-diagonal values use the one-dimensional oscillatory
representation (q = -x_0^2 + |x'|^2; exact Fresnel transform of the
defining momentum integral)

    F_alpha(z, q) = K(alpha, n) int_0^inf e^(+i u q / 4) e^(i z / u)
                    u^(n/2 - alpha - 2) du,       Im z > 0,

with K = i (4 pi)^(-n/2) e^(-i pi n / 4) e^(i pi (alpha+1) / 2), pinned by
the q -> 0 limit and by the gradient identity
2 d_mu F_alpha = eta_{mu nu} x^nu F_{alpha-1}.  Principal branch of the
logarithm throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from math import factorial
from scipy.integrate import quad
from scipy.special import digamma, gamma as cgamma

from .errors import (
    BranchError,
    ConvergenceError,
    DimensionError,
    DomainError,
    PoleError,
)

__all__ = [
    "MeroValue",
    "ElemValue",
    "euclid_integral",
    "euclid_series_oracle",
    "fa_diag",
    "fa_diag_residue",
    "fa_offdiag",
    "fa_value",
    "minkowski_q",
    "pde_check",
    "bernstein_check",
    "POLE_GUARD",
]

POLE_GUARD = 1e-8


@dataclass(frozen=True)
class MeroValue:
    """Value of a meromorphic function: finite part, pole order, residue."""

    analytic_part: complex
    pole_order: int = 0
    residue: complex = 0j

    @property
    def value(self) -> complex:
        if self.pole_order:
            raise PoleError("value requested at a pole; use analytic_part/residue")
        return self.analytic_part


@dataclass(frozen=True)
class ElemValue:
    alpha: complex
    z: complex
    q: float
    value: complex
    pole_distance: float


def _check_even_dim(n: int):
    if n % 2 != 0 or n < 2:
        raise DimensionError(f"even dimension n >= 2 required, got {n}")


def _neg_z_log(z: complex) -> complex:
    """log(-z) with the boundary-from-above prescription on the positive reals."""
    if z == 0:
        raise BranchError("z = 0 sits on the branch point")
    if z.imag == 0 and z.real > 0:
        return np.log(z.real) - 1j * np.pi
    w = -complex(z)
    if w.real < 0 and w.imag == 0:
        raise BranchError(f"-z = {w} lies on the cut (-inf, 0]")
    return complex(np.log(w))


def _neg_z_pow(z: complex, s: complex) -> complex:
    return complex(np.exp(s * _neg_z_log(z)))


# ---------------------------------------------------------------------------
# Euclidean reference integral


def euclid_integral(alpha: complex, z: complex, n: int, verify: bool = False) -> MeroValue:
    """Meromorphic continuation of int_{R^n} (|xi|^2 - z)^(-alpha) d^n xi.

    Closed form pi^(n/2) (-z)^(n/2-alpha) / prod_{j=1..n/2} (alpha - j), with
    simple poles exactly at alpha in {1, ..., n/2}.  With verify=True the
    value is cross-checked against the split-series oracle.
    """
    _check_even_dim(n)
    if n > 8:
        raise DimensionError("n <= 8 supported")
    if z.imag == 0 and z.real >= 0:
        raise BranchError("z must avoid [0, inf)")
    alpha = complex(alpha)
    half = n // 2
    js = np.arange(1, half + 1)
    dists = np.abs(alpha - js)
    k = int(js[np.argmin(dists)])
    prefac = np.pi ** (n / 2)
    if dists.min() < POLE_GUARD:
        # Laurent data at alpha = k: value = pref (-z)^(half-a) / ((a-k) q(a))
        qk = np.prod([k - j for j in js if j != k]) if half > 1 else 1.0
        residue = prefac * _neg_z_pow(z, half - k) / qk
        dlog = sum(1.0 / (k - j) for j in js if j != k)
        analytic = residue * (-_neg_z_log(z) - dlog)
        return MeroValue(analytic_part=analytic, pole_order=1, residue=residue)
    denom = np.prod(alpha - js)
    val = prefac * _neg_z_pow(z, half - alpha) / denom
    if verify:
        oracle = euclid_series_oracle(alpha, z, n)
        scale = max(1.0, abs(val))
        if abs(val - oracle) > 1e-7 * scale:
            raise ConvergenceError(
                f"closed form {val} disagrees with series oracle {oracle}"
            )
    return MeroValue(analytic_part=complex(val))


def euclid_series_oracle(alpha: complex, z: complex, n: int, terms: int = 80) -> complex:
    """Split-series evaluation: pole series over [0,1] plus entire tail.

    int = pi^(n/2)/Gamma(alpha) [ sum_k z^k/(k! (alpha - n/2 + k))
          + int_1^inf e^(t z) t^(alpha - n/2 - 1) dt ].
    The tail is integrated along the descent ray t = 1 + tau (-conj z)/|z|.
    """
    _check_even_dim(n)
    alpha = complex(alpha)
    z = complex(z)
    half = n // 2
    ks = np.arange(terms)
    series = np.sum(z ** ks / (np.array([factorial(k) for k in ks], dtype=float) * (alpha - half + ks)))
    w = -np.conj(z) / abs(z)

    def integrand(tau, part):
        t = 1.0 + tau * w
        v = np.exp(t * z) * np.exp((alpha - half - 1) * np.log(t)) * w
        return v.real if part == 0 else v.imag

    re = quad(lambda s: integrand(s, 0), 0, np.inf, limit=200)[0]
    im = quad(lambda s: integrand(s, 1), 0, np.inf, limit=200)[0]
    tail = re + 1j * im
    return np.pi ** (n / 2) / cgamma(alpha) * (series + tail)


# ---------------------------------------------------------------------------
# Diagonal values


def _diag_pole_index(alpha: complex, n: int):
    """j >= 0 with alpha ~ n/2 - 1 - j, or None."""
    beta = alpha + 1 - n / 2  # poles of Gamma at beta = -j
    j = int(round(-beta.real))
    if j >= 0 and abs(beta + j) < POLE_GUARD:
        return j
    return None


def diag_pole_distance(alpha: complex, n: int) -> float:
    beta = alpha + 1 - n / 2
    j = max(0, int(round(-beta.real)))
    return float(min(abs(beta + j), abs(beta + j + 1) if j >= 0 else np.inf))


def _wick_sign(z: complex) -> float:
    return -1.0 if z.imag < 0 else 1.0


def fa_diag(alpha: complex, z: complex, n: int) -> MeroValue:
    """F_alpha(z, 0) as a MeroValue; poles at alpha in n/2 - 1 - N.

    Im z >= 0 uses the upper-half (Feynman) branch, Im z < 0 the conjugate
    one; z = 0 is rejected (infrared pole, regulate with -m^2 -+ i eps).
    """
    _check_even_dim(n)
    alpha = complex(alpha)
    z = complex(z)
    if z == 0:
        raise BranchError("z = 0: infrared pole; use a mass/eps regulator")
    sign = _wick_sign(z)
    pref = sign * 1j * (4 * np.pi) ** (-n / 2)
    j = _diag_pole_index(alpha, n)
    if j is not None:
        residue = pref * z ** j / factorial(j)
        analytic = residue * (digamma(j + 1) - _neg_z_log(z))
        return MeroValue(analytic_part=complex(analytic), pole_order=1, residue=complex(residue))
    val = pref * cgamma(alpha + 1 - n / 2) * _neg_z_pow(z, n / 2 - alpha - 1)
    return MeroValue(analytic_part=complex(val))


def fa_diag_residue(alpha: complex, z: complex, n: int) -> complex:
    mv = fa_diag(alpha, z, n)
    return mv.residue


def fa_value(alpha: complex, z: complex, q: float, n: int) -> ElemValue:
    """Bookkeeping wrapper used by the CLI."""
    if q == 0.0:
        v = fa_diag(alpha, z, n).value
    else:
        v = fa_offdiag(alpha, z, q, n)
    return ElemValue(
        alpha=complex(alpha),
        z=complex(z),
        q=float(q),
        value=complex(v),
        pole_distance=diag_pole_distance(complex(alpha), n),
    )


# ---------------------------------------------------------------------------
# Off-diagonal oscillatory representation


def _quad_complex(f, tol: float):
    re, err_r = quad(lambda t: f(t).real, 0, np.inf, epsabs=tol, epsrel=1e-11, limit=400)[:2]
    im, err_i = quad(lambda t: f(t).imag, 0, np.inf, epsabs=tol, epsrel=1e-11, limit=400)[:2]
    if err_r + err_i > 50 * tol + 1e-13:
        raise ConvergenceError(f"quadrature error estimate {err_r + err_i:.2e} above tolerance")
    return re + 1j * im


def fa_offdiag(alpha: complex, z: complex, q: float, n: int, tol: float = 1e-9) -> complex:
    """F_alpha(z, q) for q != 0 via the split oscillatory representation.

    IR piece (u <= 1): substituted to w = 1/u on [1, inf) and rotated onto
    the steepest ray of e^(izw).  UV piece (u >= 1): rotated into the half
    plane where e^(-iuq/4) decays, the side set by the sign of q.
    """
    _check_even_dim(n)
    alpha = complex(alpha)
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("off-diagonal evaluation needs Im z > 0")
    if q == 0.0:
        raise DomainError("q = 0 is the diagonal; use fa_diag")
    K = 1j * (4 * np.pi) ** (-n / 2) * np.exp(-1j * np.pi * n / 4) * np.exp(1j * np.pi * (alpha + 1) / 2)
    piece_tol = tol / (2 * abs(K))

    # IR (u <= 1 after w = 1/u): int_1^inf e^{i q/(4w)} e^{izw} w^{alpha - n/2} dw
    phi1 = np.clip(np.pi / 2 - np.angle(z), -np.pi / 2 + 0.05, np.pi / 2 - 0.05)
    w_dir = np.exp(1j * phi1)

    def f_ir(tau):
        w = 1.0 + tau * w_dir
        return np.exp(1j * q / (4 * w) + 1j * z * w + (alpha - n / 2) * np.log(w)) * w_dir

    ir = _quad_complex(f_ir, piece_tol)

    # UV: int_1^inf e^{i u q / 4} e^{i z / u} u^{n/2 - alpha - 2} du;
    # e^{iuq/4} decays for Im u > 0 when q > 0 and Im u < 0 when q < 0
    phi2 = 1.0 * np.sign(q)
    u_dir = np.exp(1j * phi2)

    def f_uv(tau):
        u = 1.0 + tau * u_dir
        return np.exp(1j * u * q / 4 + 1j * z / u + (n / 2 - alpha - 2) * np.log(u)) * u_dir

    uv = _quad_complex(f_uv, piece_tol)
    return complex(K * (ir + uv))


def minkowski_q(x) -> float:
    """Q(x) = |x|^2_eta = -x_0^2 + |x'|^2."""
    x = np.asarray(x, dtype=float)
    return float(-x[0] ** 2 + np.sum(x[1:] ** 2))


def _offdiag_at(alpha, z, n, x, cache):
    q = minkowski_q(x)
    key = (round(q, 14),)
    if key not in cache:
        cache[key] = fa_offdiag(alpha, z, q, n)
    return cache[key]


def _wave_stencil(alpha, z, n, x, h):
    """4th-order FD wave operator applied to F_alpha(z, Q(.)) at x."""
    cache = {}
    eta_diag = np.array([1.0] + [-1.0] * (n - 1))
    center = _offdiag_at(alpha, z, n, x, cache)
    box = 0j
    for mu in range(n):
        e = np.zeros(n)
        e[mu] = h
        fm2 = _offdiag_at(alpha, z, n, x - 2 * e, cache)
        fm1 = _offdiag_at(alpha, z, n, x - e, cache)
        fp1 = _offdiag_at(alpha, z, n, x + e, cache)
        fp2 = _offdiag_at(alpha, z, n, x + 2 * e, cache)
        d2 = (-fm2 + 16 * fm1 - 30 * center + 16 * fp1 - fp2) / (12 * h * h)
        box += eta_diag[mu] * d2
    return center, box


def pde_check(alpha: complex, z: complex, n: int, points, h: float = 0.02) -> dict:
    """Residuals of (box_eta - z) F_alpha = alpha F_{alpha-1} and of the
    gradient identity 2 d_mu F_alpha = eta_{mu nu} x^nu F_{alpha-1} on a grid
    of points off the light cone."""
    alpha = complex(alpha)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n_pts = len(points)
    eta_diag = np.array([1.0] + [-1.0] * (n - 1))
    res_pde = []
    res_grad = []
    scale = []
    for x in points:
        if abs(minkowski_q(x)) < 10 * h:
            raise DomainError(f"grid point {x} too close to the light cone")
        center, box = _wave_stencil(alpha, z, n, x, h)
        if alpha != 0:
            rhs = alpha * fa_offdiag(alpha - 1, z, minkowski_q(x), n)
        else:
            rhs = 0j
        res_pde.append(abs(box - z * center - rhs))
        scale.append(max(abs(rhs), abs(z * center)))
        # gradient identity at the same point, first axis only (they are all
        # equivalent under Lorentz invariance of Q)
        cache = {}
        g = []
        for mu in range(n):
            e = np.zeros(n)
            e[mu] = h
            fm2 = _offdiag_at(alpha, z, n, x - 2 * e, cache)
            fm1 = _offdiag_at(alpha, z, n, x - e, cache)
            fp1 = _offdiag_at(alpha, z, n, x + e, cache)
            fp2 = _offdiag_at(alpha, z, n, x + 2 * e, cache)
            g.append((fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h))
        fam1 = fa_offdiag(alpha - 1, z, minkowski_q(x), n)
        grad_res = max(
            abs(2 * g[mu] - eta_diag[mu] * x[mu] * fam1) for mu in range(n)
        )
        res_grad.append(grad_res)
    scale = max(max(scale), 1e-300)
    return {
        "max_pde_residual": float(np.max(res_pde)),
        "relative_pde_residual": float(np.max(res_pde) / scale),
        "max_gradient_residual": float(np.max(res_grad)),
        "scale": float(scale),
        "points": n_pts,
    }


def bernstein_check(alpha: complex, z: complex, n: int, point, h: float = 0.02) -> dict:
    """Functional-equation check A(alpha) F_alpha = F_{alpha+1} at a point,

        A F = [ (2 alpha n - 4 alpha (alpha+1)) F - Q(x) (box_eta - z) F ]
              / (4 alpha z),

    the closed x-space form of the Bernstein-Sato relation for this family.
    """
    alpha = complex(alpha)
    if alpha == 0:
        return {"status": "prefactor-zero", "residual": 0.0, "relative_residual": 0.0}
    x = np.asarray(point, dtype=float)
    qx = minkowski_q(x)
    if abs(qx) < 10 * h:
        raise DomainError("point too close to the light cone")
    center, box = _wave_stencil(alpha, z, n, x, h)
    lhs = ((2 * alpha * n - 4 * alpha * (alpha + 1)) * center - qx * (box - z * center)) / (
        4 * alpha * z
    )
    rhs = fa_offdiag(alpha + 1, z, qx, n)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return {
        "status": "ok",
        "residual": float(abs(lhs - rhs)),
        "relative_residual": float(rel),
        "lhs": complex(lhs),
        "rhs": complex(rhs),
    }
