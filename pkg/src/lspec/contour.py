"""Resolvent contours gamma_eps / gamma_0 / eta_delta and certified
contour quadrature; scalar contour-power identities.

gamma_eps is the upper-half-plane path (shifted by i eps)

    e^{i(pi-theta)} (-inf, eps/2]  u  {(eps/2) e^{i w}, w: pi-theta -> 2pi+theta}
                                   u  e^{i theta} [eps/2, +inf),

traversed left to right (Re z increasing).  The weight of the complex-power
integrals is the sectorial one transported by z -> eps + i z, which is
single-valued along the contour:

    (eps + i z)^(-a)  =  e^{-i a pi/2} (z - i eps)^(-a)

with the principal branch on the right ray and its continuation across the
arc (the plain principal branch of (z - i eps)^(-a) has its cut crossing the
arc, and with (z + i eps)^(-a) the integrand is holomorphic above the contour
and the integral vanishes).  The scalar identity then reads, exactly,

    (1/2 pi i) int (eps + i z)^(-a) k! (Q - z)^(-k-1) dz
        = i^k (a)_k (eps + i Q)^(-a-k),     (a)_k = a(a+1)...(a+k-1),

the k = 0 case being the sectorial representation of the Feynman power
(P - i eps)^(-a); k >= 1 follows by k integrations by parts.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .elemfam import MeroValue, fa_diag
from .errors import PoleError, TailError, ToleranceError
from .specpowers import pochhammer_factor

__all__ = [
    "ContourSpec",
    "quadrature",
    "power_identity_check",
    "fa_contour_power",
]


@dataclass(frozen=True)
class ContourSpec:
    kind: str = "gamma_eps"  # gamma_eps | gamma_0 | eta_delta
    eps: float = 1.0
    theta: float = np.pi / 4
    zmax: float = 1e4

    def __post_init__(self):
        if self.kind not in ("gamma_eps", "gamma_0", "eta_delta"):
            raise ValueError(f"unknown contour kind {self.kind!r}")
        if self.kind == "eta_delta":
            if not (np.pi / 2 < self.theta < np.pi):
                raise ValueError("eta_delta needs theta in (pi/2, pi)")
        else:
            if not (0 < self.theta < np.pi / 2):
                raise ValueError("gamma contours need theta in (0, pi/2)")
        if self.kind == "gamma_eps" and self.eps <= 0:
            raise ValueError("gamma_eps needs eps > 0")

    def segments(self):
        """('ray'|'arc', map t -> z, dz/dt, (t_lo, t_hi)) in traversal order.

        Ray parameters are radial distances (integrated in log scale,
        concentrating nodes toward the arc); arc parameters are angles.
        """
        th = self.theta
        if self.kind == "gamma_0":
            return [
                ("ray", lambda t: np.exp(1j * (np.pi - th)) * t,
                 lambda t: np.exp(1j * (np.pi - th)), (self.zmax, 1e-8)),
                ("ray", lambda t: np.exp(1j * th) * t,
                 lambda t: np.exp(1j * th), (1e-8, self.zmax)),
            ]
        if self.kind == "gamma_eps":
            e = self.eps
            shift = 1j * e
            r0 = e / 2
            return [
                ("ray", lambda t: np.exp(1j * (np.pi - th)) * t + shift,
                 lambda t: np.exp(1j * (np.pi - th)), (self.zmax, r0)),
                ("arc", lambda w: r0 * np.exp(1j * w) + shift,
                 lambda w: 1j * r0 * np.exp(1j * w), (np.pi - th, 2 * np.pi + th)),
                ("ray", lambda t: np.exp(1j * th) * t + shift,
                 lambda t: np.exp(1j * th), (r0, self.zmax)),
            ]
        # eta_delta: from Im z >> 0 to Im z << 0
        e = self.eps
        return [
            ("ray", lambda t: np.exp(1j * th) * t, lambda t: np.exp(1j * th), (self.zmax, e)),
            ("arc", lambda w: e * np.exp(1j * w), lambda w: 1j * e * np.exp(1j * w), (th, -th)),
            ("ray", lambda t: np.exp(-1j * th) * t, lambda t: np.exp(-1j * th), (e, self.zmax)),
        ]


def quadrature(
    f: Callable[[complex], complex],
    contour: ContourSpec,
    decay: float,
    tol: float = 1e-10,
):
    """Integral of f over the contour with a certified truncation tail.

    The caller declares a decay exponent beta > 0 with |f(z)| <= C |z|^(-1-beta)
    for |z| >= zmax/2; the sampled magnitudes are checked against it and the
    tail bound C zmax^(-beta)/beta (per ray) is added to the error estimate.
    Returns (value, error_estimate).
    """
    if decay <= 0:
        raise TailError("a positive decay exponent must be declared")
    total = 0j
    err = 0.0
    for kind, zfun, dzfun, (a, b) in contour.segments():
        if kind == "ray":
            sgn = 1.0
            lo, hi = a, b
            if lo > hi:
                lo, hi, sgn = hi, lo, -1.0
            slo, shi = np.log(lo), np.log(hi)

            def g(s):
                t = np.exp(s)
                return f(zfun(t)) * dzfun(t) * t

            re, er = quad(lambda s: g(s).real, slo, shi, epsabs=tol, limit=400)[:2]
            im, ei = quad(lambda s: g(s).imag, slo, shi, epsabs=tol, limit=400)[:2]
            total += sgn * (re + 1j * im)
        else:
            re, er = quad(lambda t: (f(zfun(t)) * dzfun(t)).real, a, b, epsabs=tol, limit=400)[:2]
            im, ei = quad(lambda t: (f(zfun(t)) * dzfun(t)).imag, a, b, epsabs=tol, limit=400)[:2]
            total += re + 1j * im
        err += er + ei

    # tail certificate on both rays
    segs = contour.segments()
    C = 0.0
    for kind, zfun, _, _ in (segs[0], segs[-1]):
        t1, t2 = contour.zmax / 2, contour.zmax
        m1, m2 = abs(f(zfun(t1))), abs(f(zfun(t2)))
        expected = m1 * (t2 / t1) ** (-1.0 - decay)
        if m2 > 10.0 * expected + 1e-300:
            raise TailError(
                f"sampled |f| at zmax ({m2:.2e}) inconsistent with declared decay "
                f"{decay} (expected <= {expected:.2e})"
            )
        C = max(C, m1 * t1 ** (1.0 + decay), m2 * t2 ** (1.0 + decay))
    tail = 2 * C * contour.zmax ** (-decay) / decay
    err += tail
    # the QUADPACK estimates bottom out at roundoff relative to the integrand
    # peak near the arc; only gross failures are raised, the estimate itself
    # is returned for the caller to judge
    if err > 0.01 * max(1.0, abs(total)):
        raise ToleranceError(f"contour quadrature error estimate {err:.2e} above tolerance")
    return total, err


def power_identity_check(alpha: complex, k: int, eps: float, xi_q: float, theta: float = np.pi / 4,
                         zmax: float | None = None) -> float:
    """Relative error in the scalar contour-power identity at Q(xi) = xi_q."""
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise ValueError("Re alpha > 0 required for contour convergence")
    if eps <= 0:
        raise ValueError("eps > 0 regulates the identity")
    if zmax is None:
        # integrand ~ |z|^{-Re alpha - k - 1}; pick zmax so the tail clears 1e-12
        zmax = max(50.0, (1e14) ** (1.0 / (alpha.real + k)))
        zmax = min(zmax, 1e8)
    spec = ContourSpec(kind="gamma_eps", eps=eps, theta=theta, zmax=zmax)
    kfac = float(factorial(k))

    def f(z):
        return (eps + 1j * z) ** (-alpha) * kfac * (xi_q - z) ** (-k - 1)

    val, _ = quadrature(f, spec, decay=float(alpha.real + k), tol=1e-11)
    lhs = val / (2j * np.pi)
    rhs = 1j ** k * pochhammer_factor(alpha, k) * (eps + 1j * xi_q) ** (-alpha - k)
    return float(abs(lhs - rhs) / abs(rhs))


def fa_contour_power(
    alpha: complex,
    k: int,
    eps: float,
    mass: float,
    n: int,
    branch: int = -1,
    verify: bool = False,
    theta: float = np.pi / 4,
):
    """Diagonal contour power (Feynman side, branch = -1):

        (1/2 pi i) int_{gamma_eps} (z - i eps)^(-alpha) F_k(z - mass^2, 0) dz
            = (alpha)_k / Gamma(alpha+k) * F_{alpha+k-1}(-mass^2 + i eps, 0);

    branch = +1 gives the conjugate pairing, evaluated from the closed form.
    verify=True also quadratures the left side (needs k >= n/2, where the
    diagonal value of F_k is finite, and branch = -1) and checks the gap.
    Returns (MeroValue, gap or None).
    """
    from scipy.special import gamma as cgamma

    alpha = complex(alpha)
    if alpha.real <= 0:
        raise ValueError("Re alpha > 0 required")
    coeff = pochhammer_factor(alpha, k) / cgamma(alpha + k)
    target = fa_diag(alpha + k - 1, -mass ** 2 - 1j * branch * eps, n)
    result = MeroValue(
        analytic_part=coeff * target.analytic_part,
        pole_order=target.pole_order,
        residue=coeff * target.residue,
    )
    gap = None
    if verify:
        if branch != -1:
            raise ValueError("verify mode runs on the (P - i eps) pairing (branch = -1)")
        if k < n // 2:
            raise PoleError(
                f"verify mode needs k >= n/2 = {n // 2}: F_k(.,0) diverges on the diagonal"
            )
        if result.pole_order:
            raise PoleError("verify mode at a pole of the right side")
        zmax = max(60.0, (1e13) ** (1.0 / (alpha.real + k - n / 2 + 1)))
        spec = ContourSpec(kind="gamma_eps", eps=eps, theta=theta, zmax=min(zmax, 1e8))

        def f(z):
            return (eps + 1j * z) ** (-alpha) * fa_diag(k, z - mass ** 2, n).value

        val, _ = quadrature(f, spec, decay=float(alpha.real + k - n / 2 + 1), tol=1e-11)
        lhs = val / (2j * np.pi) * np.exp(1j * alpha * np.pi / 2)
        gap = float(abs(lhs - result.analytic_part) / max(abs(result.analytic_part), 1e-300))
    return result, gap