"""Acceptance-suite driver: every shipped criterion with its pinned tolerance.

Each check returns a CriterionResult; the CLI prints one pass/fail line per
criterion and exits nonzero if any fail, and the pytest suite asserts them
individually.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial, gamma as rgamma
from typing import Callable, List, Optional

import numpy as np

from . import contour as ct
from . import elemfam as ef
from . import geomkit as gk
from . import hadamard as hd
from . import scflow as sf
from . import specpowers as sp
from . import ultrastatic as us

__all__ = ["CriterionResult", "run_suite", "fd_curvature_oracle", "CRITERIA"]


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float


def fd_curvature_oracle(metric: gk.MetricField, x, h: float = 2e-3, richardson: bool = True) -> float:
    """Independent scalar-curvature oracle: plain 2nd-order central
    differences of metric.eval only, index loops written out.  Richardson
    extrapolation over h and h/2 removes the leading O(h^2) bias."""
    if richardson:
        r1 = fd_curvature_oracle(metric, x, h, richardson=False)
        r2 = fd_curvature_oracle(metric, x, h / 2, richardson=False)
        return (4.0 * r2 - r1) / 3.0
    x = np.asarray(x, dtype=float)
    n = metric.dim

    def g_at(p):
        return metric.eval(p)

    def dg(k, p):
        e = np.zeros(n)
        e[k] = h
        return (g_at(p + e) - g_at(p - e)) / (2 * h)

    def d2g(k, l, p):
        ek = np.zeros(n)
        ek[k] = h
        el = np.zeros(n)
        el[l] = h
        return (
            g_at(p + ek + el) - g_at(p + ek - el) - g_at(p - ek + el) + g_at(p - ek - el)
        ) / (4 * h * h)

    g = g_at(x)
    ginv = np.linalg.inv(g)
    dgs = [dg(k, x) for k in range(n)]
    gam = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0.0
                for l in range(n):
                    s += ginv[i, l] * (dgs[j][l, k] + dgs[k][l, j] - dgs[l][j, k])
                gam[i, j, k] = 0.5 * s

    # derivative of Christoffels by nested differencing of eval
    dgam = np.zeros((n, n, n, n))
    for m in range(n):
        em = np.zeros(n)
        em[m] = h
        for sgn, pt in ((1.0, x + em), (-1.0, x - em)):
            gp = g_at(pt)
            ginvp = np.linalg.inv(gp)
            dgp = [dg(k, pt) for k in range(n)]
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        s = 0.0
                        for l in range(n):
                            s += ginvp[i, l] * (dgp[j][l, k] + dgp[k][l, j] - dgp[l][j, k])
                        dgam[m, i, j, k] += sgn * 0.5 * s / (2 * h)

    ric = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            s = 0.0
            for k in range(n):
                s += dgam[k, k, l, j] - dgam[l, k, k, j]
                for m in range(n):
                    s += gam[k, k, m] * gam[m, l, j] - gam[k, l, m] * gam[m, k, j]
            ric[j, l] = s
    return float(np.einsum("jl,jl->", ginv, ric))


# ---------------------------------------------------------------------------


@dataclass
class _Ctx:
    """Shared expensive intermediates across criteria."""

    _sphere_chart: Optional[gk.NormalChart] = None
    _sphere_seq: Optional[hd.HadamardSequence] = None
    _profile: Optional[sp.SchwartzProfile] = None

    def sphere_metric(self):
        return gk.make_ultrastatic_sphere(1.0)

    def sphere_base(self):
        return np.array([0.0, np.pi / 2, np.pi / 2, 0.0])

    def sphere_chart(self):
        if self._sphere_chart is None:
            self._sphere_chart = gk.normal_chart(self.sphere_metric(), self.sphere_base())
        return self._sphere_chart

    def sphere_seq(self):
        if self._sphere_seq is None:
            self._sphere_seq = hd.hadamard_sequence(self.sphere_chart(), 2)
        return self._sphere_seq

    def profile(self):
        if self._profile is None:
            self._profile = sp.SchwartzProfile(1.5, 0.5)
        return self._profile


def _c1_curvature(ctx: _Ctx):
    mk = gk.make_minkowski()
    r_mink = abs(gk.curvature(mk, np.zeros(4)).scalar)
    ms = ctx.sphere_metric()
    x0 = ctx.sphere_base()
    r_art = gk.curvature(ms, x0).scalar
    r_fd = fd_curvature_oracle(ms, x0)
    gap = abs(r_art - r_fd)
    ok = r_mink <= 1e-10 and gap <= 1e-5
    return ok, f"|R_mink|={r_mink:.2e} (<=1e-10), |R_sphere-FD oracle|={gap:.2e} (<=1e-5)"


def _c2_normal_chart(ctx: _Ctx):
    chart = ctx.sphere_chart()
    rng = np.random.default_rng(7)
    dirs = rng.normal(size=(100, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    Y = dirs * rng.uniform(0.05, 0.95, size=(100, 1)) * chart.radius
    gt = chart.pulled_metric(Y)
    eta = chart.eta()
    worst = 0.0
    for i in range(100):
        y = Y[i]
        worst = max(worst, float(np.max(np.abs(gt[i] @ y - eta @ y))) / (1 + np.linalg.norm(y)))
    C = gk.metric_taylor2(chart)
    cp = gk.curvature(ctx.sphere_metric(), ctx.sphere_base())
    E = chart.frame.vectors
    Rf = np.einsum("ijkl,ia,jb,kc,ld->abcd", cp.riemann, E, E, E, E)
    T = np.transpose(Rf, (0, 2, 1, 3))
    pred = 0.5 * (T + np.transpose(T, (0, 1, 3, 2))) / 3.0
    jet_gap = float(np.max(np.abs(C - pred)))
    ok = worst <= 1e-7 and jet_gap <= 1e-4
    return ok, f"radial identity {worst:.2e} (<=1e-7), jet vs R/3 {jet_gap:.2e} (<=1e-4)"


def _c3_hadamard_u1(ctx: _Ctx):
    details = []
    ok = True
    for metric, base in (
        (ctx.sphere_metric(), ctx.sphere_base()),
        (gk.make_expanding(), np.zeros(4)),
    ):
        if metric.name == "ultrastatic-sphere":
            seq = ctx.sphere_seq()
            rg = gk.curvature(metric, base).scalar
        else:
            chart = gk.normal_chart(metric, base)
            seq = hd.hadamard_sequence(chart, 1)
            rg = gk.curvature(metric, base).scalar
        gap = abs(seq.diag[1] + rg / 6) / max(1.0, abs(rg / 6))
        ok = ok and gap <= 1e-3
        details.append(f"{metric.name}: |u1+Rg/6| rel={gap:.2e}")
    return ok, "; ".join(details) + " (<=1e-3)"


def _c4_euclid_residues(ctx: _Ctx):
    worst = 0.0
    for k in (1, 2):
        for z in (-1.0 + 0j, 2j - 1):
            num = sp.circle_residue(
                lambda a: ef.euclid_integral(a, z, 4).analytic_part, float(k), radius=1e-3
            )
            pred = z ** (2 - k) * np.pi ** 2 / (factorial(2 - k) * rgamma(k))
            worst = max(worst, abs(num - pred))
    return worst <= 1e-8, f"max residue gap {worst:.2e} (<=1e-8)"


def _c5_contour_identity(ctx: _Ctx):
    worst = 0.0
    for a in (1.5, 2.3, 3.7):
        for k in (0, 1, 2):
            for eps in (0.1, 1.0):
                rel = ct.power_identity_check(a, k, eps, 2.0)
                worst = max(worst, rel)
    return worst <= 1e-6, f"max rel err {worst:.2e} (<=1e-6) over 18 cases"


def _c6_pde_identity(ctx: _Ctx):
    rng = np.random.default_rng(3)
    pts = []
    while len(pts) < 5:
        x = rng.uniform(-1.2, 1.2, size=4)
        x[0] *= 0.25
        if ef.minkowski_q(x) > 0.4:
            pts.append(x)
    pts = np.array(pts)
    worst = 0.0
    for a in (2.0, 3.5):
        for z in (2j, 1 + 2j):
            out = ef.pde_check(a, z, 4, pts)
            worst = max(worst, out["relative_pde_residual"])
    return worst <= 1e-3, f"max relative PDE residual {worst:.2e} (<=1e-3)"


def _c7_cpower_residues(ctx: _Ctx):
    seq = ctx.sphere_seq()
    u = tuple(seq.diag[:3])
    worst = 0.0
    details = []
    for m, a0 in ((0, 2.0), (1, 1.0)):
        vals = []
        for eps in (1e-1, 1e-2, 1e-3):
            pd = sp.PowerDiagonal(n=4, mass=0.0, eps=eps, u_diag=u, branch=-1)
            vals.append(
                sp.circle_residue(lambda a: sp.cpower_diag(pd, a).analytic_part, a0, radius=1e-3)
            )
        extr = vals[2] + (vals[2] - vals[1]) / 9.0
        pred = 1j * u[m] / (2 ** 4 * np.pi ** 2 * factorial(2 - m - 1))
        rel = abs(extr - pred) / abs(pred)
        worst = max(worst, rel)
        details.append(f"alpha={a0}: rel {rel:.2e}")
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=u, branch=-1)
    zero_mag = max(
        abs(sp.circle_residue(lambda a: sp.cpower_diag(pd, a).analytic_part, a0, radius=1e-3))
        for a0 in (0.0, -1.0)
    )
    ok = worst <= 1e-3 and zero_mag <= 1e-10
    return ok, "; ".join(details) + f"; |res(0,-1)|={zero_mag:.1e} (<=1e-10)"


def _c8_kkw(ctx: _Ctx):
    seq = ctx.sphere_seq()
    rg = gk.curvature(ctx.sphere_metric(), ctx.sphere_base()).scalar
    u = tuple(seq.diag[:3])
    vals = []
    for eps in (1e-1, 1e-2, 1e-3):
        pd = sp.PowerDiagonal(n=4, mass=0.0, eps=eps, u_diag=u, branch=-1)
        vals.append(sp.cpower_diag(pd, 1.0).residue)
    extr = vals[2] + (vals[2] - vals[1]) / 9.0
    target = rg / (1j * 6 * (4 * np.pi) ** 2 * rgamma(1.0))
    rel = abs(extr - target) / abs(target)
    return rel <= 2e-3, f"KKW residue rel err {rel:.2e} (<=2e-3)"


def _fit_kernel(ctx: _Ctx, kind, param, mass, eps, lams):
    prof = ctx.profile()
    samples = []
    tails = []
    for lam in lams:
        model = us.build_model(kind, param, us.default_lambda_max(lam))
        kv = us.kernel_diag(model, prof, lam, mass, eps)
        samples.append((lam, kv.value))
        tails.append(kv.tail_bound)
    coef, resid, cond = us.fit_expansion(samples, 4, terms=3)
    return samples, coef, tails


def _c9_torus_action(ctx: _Ctx):
    prof = ctx.profile()
    eps = 1e-2
    lams = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0]
    samples, coef, tails = _fit_kernel(ctx, "torus", 2 * np.pi, 0.0, eps, lams)
    c0 = sp.ck_coefficient(prof, 4, 0)
    pred = np.exp(1j * np.pi) * c0 / (1j * 16 * np.pi ** 2)
    mod_rel = abs(abs(coef[0]) - abs(pred)) / abs(pred)
    phase_gap = abs(np.angle(coef[0] / pred))
    sub_rel = abs(coef[1]) / abs(coef[0])
    ok = mod_rel <= 0.02 and phase_gap <= 0.02 and sub_rel <= 0.02
    return ok, (
        f"Lambda^4 modulus rel {mod_rel:.2e}, phase {phase_gap:.2e} (<=2e-2); "
        f"|Lambda^2 coeff|/|Lambda^4 coeff| = {sub_rel:.2e} (<=2e-2)"
    )


def _c10_sphere_action(ctx: _Ctx):
    prof = ctx.profile()
    eps = 1e-2
    rg = gk.curvature(ctx.sphere_metric(), ctx.sphere_base()).scalar
    u1 = -rg / 6
    lams = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0]
    samples, coef, tails = _fit_kernel(ctx, "sphere", 1.0, 0.0, eps, lams)
    c1 = sp.ck_coefficient(prof, 4, 1)
    pred = np.exp(1j * np.pi / 2) * c1 * u1 / (1j * 16 * np.pi ** 2)
    rel = abs(coef[1] - pred) / abs(pred)
    return rel <= 0.05, f"Lambda^2 coefficient rel err {rel:.2e} (<=5e-2), u1={u1}"


def _c11_mellin_vs_spectral(ctx: _Ctx):
    prof = ctx.profile()
    eps, lam = 1e-2, 40.0
    model = us.build_model("torus", 2 * np.pi, us.default_lambda_max(lam))
    kv = us.kernel_diag(model, prof, lam, 0.0, eps)
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=eps, u_diag=(1.0, 0.0, 0.0), branch=1)
    mel = sp.f_of_operator_diag(pd, prof, lam)
    rel = abs(mel - kv.value) / abs(kv.value)
    return rel <= 0.02, f"Mellin vs spectral rel gap {rel:.2e} (<=2e-2) at Lambda=40"


def _c12_nontrapping(ctx: _Ctx):
    mk = gk.make_minkowski()
    rep = sf.nontrapping_certificate(mk, 100, seed=11)
    ok = rep.passed and rep.worst_closest < 1e-3
    # flow reversal swaps classifications exactly on a fresh sample
    from dataclasses import replace

    m_inf = replace(
        mk, patch=gk.Box(lo=np.full(4, -np.inf), hi=np.full(4, np.inf))
    )
    x = np.array([0.4, -1.2, 0.7, 0.2])
    xi = sf.characteristic_covector(m_inf, x, np.array([0.2, 0.5, -0.8]))
    pt = sf.ScPhasePoint(x=x, xi=xi)
    fwd = sf.hamilton_step(m_inf, pt, +1)
    bwd = sf.hamilton_step(m_inf, pt, -1)
    swap = {fwd.classification, bwd.classification} == {"reached_L_plus", "reached_L_minus"}
    ok = ok and swap
    return ok, (
        f"{rep.classified}/{rep.samples} classified, worst approach "
        f"{rep.worst_closest:.2e} (<1e-3), reversal swap={swap}"
    )


CRITERIA: List[tuple] = [
    (1, "curvature engine (Minkowski flat, sphere vs FD oracle)", _c1_curvature),
    (2, "normal-chart radial identity and quadratic jet", _c2_normal_chart),
    (3, "Hadamard u1(0) = -R_g/6 on two non-flat metrics", _c3_hadamard_u1),
    (4, "Euclidean residues at alpha = 1, 2", _c4_euclid_residues),
    (5, "contour power identity, 18 parameter sets", _c5_contour_identity),
    (6, "wave-operator PDE identity for F_alpha", _c6_pde_identity),
    (7, "complex-power residues at alpha = 2, 1, 0, -1", _c7_cpower_residues),
    (8, "Kastler-Kalau-Walze residue (eps -> 0)", _c8_kkw),
    (9, "spectral action on the torus (Lambda^4 fit)", _c9_torus_action),
    (10, "spectral action on the 3-sphere (Lambda^2 fit)", _c10_sphere_action),
    (11, "Mellin route vs spectral sum at Lambda = 40", _c11_mellin_vs_spectral),
    (12, "non-trapping certificate, 100 Minkowski samples", _c12_nontrapping),
]


def run_suite(indices=None, printer: Callable[[str], None] = print) -> List[CriterionResult]:
    ctx = _Ctx()
    results = []
    for idx, name, fn in CRITERIA:
        if indices and idx not in indices:
            continue
        t0 = time.time()
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # honest red, not a crash
            ok, detail = False, f"exception: {type(exc).__name__}: {exc}"
        dt = time.time() - t0
        results.append(CriterionResult(idx, name, ok, detail, dt))
        printer(f"[{'PASS' if ok else 'FAIL'}] {idx:2d} {name}  ({dt:.1f}s)  {detail}")
    return results
