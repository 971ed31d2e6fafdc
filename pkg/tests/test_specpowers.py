from math import factorial, gamma as rgamma

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as cgamma

from lspec import specpowers as sp
from lspec.errors import DimensionError, TailError


def test_pochhammer_basics():
    assert sp.pochhammer_factor(2.3 + 1j, 0) == 1
    a = 2.3 + 1j
    assert abs(sp.pochhammer_factor(a, 1) - a) == 0
    # finite everywhere, including where the Gamma quotient degenerates
    assert np.isfinite(abs(sp.pochhammer_factor(-3.0, 5)))


def test_pochhammer_full_factor_telescopes_at_one():
    # (alpha)_m / Gamma(alpha+m) -> 1 at alpha = 1 for every m
    for m in range(5):
        full = sp.pochhammer_factor(1.0, m) / rgamma(1 + m)
        assert abs(full - 1.0) <= 1e-14


def test_pochhammer_matches_gamma_quotient():
    for a in (0.7 + 0.2j, 2.5, -1.3 + 1j):
        for m in (1, 2, 4):
            pred = (-1) ** m * cgamma(1 - a) / cgamma(1 - a - m)
            assert abs(sp.pochhammer_factor(a, m) - pred) <= 1e-10 * max(1, abs(pred))


def test_profile_support_and_decay(bump_profile):
    lo, hi = bump_profile.support
    assert lo > 0
    assert bump_profile.fhat(np.array([lo - 1e-6, hi + 1e-6])).max() == 0.0
    # entire with exponential decay upward: |f(iY)| ~ e^{-lo Y}
    v1, v2 = abs(bump_profile.f(2j)), abs(bump_profile.f(6j))
    assert v2 < v1 * np.exp(-lo * 3.9 * 0.9)


def test_ck_coefficients(bump_profile):
    # dual-rule oracle: adaptive quadrature on the defining integral
    for k in (0, 1, 2):
        c = sp.ck_coefficient(bump_profile, 4, k)
        oracle = quad(
            lambda t: bump_profile.fhat(np.array([t]))[0] * t ** (k - 2.0), 1.0, 2.0, epsabs=1e-13
        )[0]
        assert abs(c - oracle) <= 1e-10
    # with support in [1, 2], consecutive coefficients are within a factor 2
    c0, c1 = sp.ck_coefficient(bump_profile, 4, 0), sp.ck_coefficient(bump_profile, 4, 1)
    assert 1.0 <= c1 / c0 <= 2.0
    # linearity in the profile amplitude
    scaled = sp.SchwartzProfile(1.5, 0.5, amplitude=3.0)
    assert abs(sp.ck_coefficient(scaled, 4, 0) - 3 * c0) <= 1e-12


def test_cpower_residues_analytic_vs_circle():
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 1.0, 0.5), branch=-1)
    for a0 in (2.0, 1.0):
        analytic = sp.cpower_residue(pd, a0)
        circ = sp.circle_residue(lambda a: sp.cpower_diag(pd, a).analytic_part, a0, radius=1e-3)
        assert abs(analytic - circ) <= 1e-8 * max(1.0, abs(circ))


def test_cpower_residue_flat_vanishes():
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 0.0, 0.0), branch=-1)
    assert abs(sp.cpower_residue(pd, 1.0)) <= 1e-2 * 1e-2 + 1e-6  # O(eps) only


def test_cpower_residues_nonpositive_vanish():
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 1.0, 0.5), branch=-1)
    for a0 in (0.0, -1.0):
        circ = sp.circle_residue(lambda a: sp.cpower_diag(pd, a).analytic_part, a0, radius=1e-3)
        assert abs(circ) <= 1e-10


def test_pole_cancellation_at_nonpositive_integers():
    pd = sp.PowerDiagonal(n=4, mass=1.0, eps=0.5, u_diag=(1.0, 0.7, 0.2), branch=-1)
    for a0 in (0.0, -1.0, -2.0):
        val = sp.cpower_diag(pd, a0 + 1e-7).analytic_part
        assert abs(val) < 1e6


def test_theorem_eps_limit_and_branch_conjugation():
    u = (1.0, 1.0, 0.5)
    for m, a0 in ((0, 2.0), (1, 1.0)):
        vals = []
        for eps in (1e-1, 1e-2, 1e-3):
            pd = sp.PowerDiagonal(n=4, mass=0.0, eps=eps, u_diag=u, branch=-1)
            vals.append(sp.cpower_residue(pd, a0))
        extr = vals[2] + (vals[2] - vals[1]) / 9.0
        pred = 1j * u[m] / (2 ** 4 * np.pi ** 2 * factorial(2 - m - 1))
        assert abs(extr - pred) <= 1e-3 * abs(pred)
    # the two branches are complex conjugates for real data
    pd_m = sp.PowerDiagonal(n=4, mass=0.5, eps=1e-2, u_diag=u, branch=-1)
    pd_p = sp.PowerDiagonal(n=4, mass=0.5, eps=1e-2, u_diag=u, branch=+1)
    a = 2.6
    assert abs(np.conj(sp.cpower_diag(pd_m, a).analytic_part) - sp.cpower_diag(pd_p, a).analytic_part) <= 1e-12


def test_gamma_weighted_residues():
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 1.0, 0.5), branch=-1)
    for k in (0, 1):
        gw = sp.gamma_weighted_residues(pd, k)
        circ = sp.circle_residue(
            lambda a: cgamma(a) * sp.cpower_diag(pd, a).analytic_part, 2.0 - k, radius=1e-3
        )
        assert abs(gw - circ) <= 1e-6 * max(1.0, abs(gw))
    with pytest.raises(DimensionError):
        sp.gamma_weighted_residues(pd, 2)
    pd6 = sp.PowerDiagonal(n=6, mass=0.3, eps=1e-2, u_diag=(1.0, 0.4, 0.1), branch=-1)
    gw2 = sp.gamma_weighted_residues(pd6, 2)
    circ2 = sp.circle_residue(
        lambda a: cgamma(a) * sp.cpower_diag(pd6, a).analytic_part, 1.0, radius=1e-3
    )
    assert abs(gw2 - circ2) <= 1e-6 * max(1.0, abs(gw2))


def test_gamma_weighted_k1_flat_massless_vanishes_with_eps():
    for eps in (1e-2, 1e-3):
        pd = sp.PowerDiagonal(n=4, mass=0.0, eps=eps, u_diag=(1.0, 0.0, 0.0), branch=-1)
        assert abs(sp.gamma_weighted_residues(pd, 1)) <= 1.1 * eps / (16 * np.pi ** 2)


def test_predicted_expansion_minkowski(bump_profile):
    n, lam = 4, 30.0
    val = sp.predicted_expansion(bump_profile, n, 0.0, 0.0, 0.0, 0.0, lam)
    c0 = sp.ck_coefficient(bump_profile, n, 0)
    lead = np.exp(1j * np.pi) * c0 / (1j * 16 * np.pi ** 2) * lam ** 4
    assert abs(val - lead) <= 1e-12 * abs(lead)
    # leading coefficient modulus is phase-free
    assert abs(abs(lead / lam ** 4) - c0 / (2 ** n * np.pi ** (n / 2))) <= 1e-15


def test_predicted_expansion_theorem12_cross_form(bump_profile):
    # a_0 C_0(f) with a_0 = (4 pi)^{-n/2}, C_0 = i^{-1} e^{i n pi/4} c_0
    n = 4
    c0 = sp.ck_coefficient(bump_profile, n, 0)
    a0 = (4 * np.pi) ** (-n / 2)
    C0 = np.exp(1j * n * np.pi / 4) / 1j * c0
    lead = np.exp(1j * n * np.pi / 4) * c0 / (1j * 2 ** n * np.pi ** (n / 2))
    assert abs(a0 * C0 - lead) <= 1e-18


def test_f_of_operator_matches_prediction_flat(bump_profile):
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 0.0, 0.0), branch=1)
    lam = 40.0
    mel = sp.f_of_operator_diag(pd, bump_profile, lam)
    pred = sp.predicted_expansion(bump_profile, 4, 0.0, 1e-2, 0.0, 0.0, lam)
    assert abs(mel - pred) / abs(pred) <= 0.02


def test_f_of_operator_lambda_scaling(bump_profile):
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 0.0, 0.0), branch=1)
    v40 = sp.f_of_operator_diag(pd, bump_profile, 40.0)
    v80 = sp.f_of_operator_diag(pd, bump_profile, 80.0)
    assert abs(abs(v80 / v40) - 2 ** 4) <= 0.03 * 2 ** 4


def test_f_of_operator_c_independence(bump_profile):
    pd = sp.PowerDiagonal(n=4, mass=0.2, eps=1e-1, u_diag=(1.0, 0.3, 0.0), branch=1)
    lam = 1.5
    v1 = sp.f_of_operator_diag(pd, bump_profile, lam, c=3.0)
    v2 = sp.f_of_operator_diag(pd, bump_profile, lam, c=4.0)
    assert abs(v1 - v2) <= 1e-8 * max(1.0, abs(v1))


def test_f_of_operator_tail_error(bump_profile):
    pd = sp.PowerDiagonal(n=4, mass=0.0, eps=1e-2, u_diag=(1.0, 0.0, 0.0), branch=1)
    with pytest.raises(TailError):
        sp.f_of_operator_diag(pd, bump_profile, 40.0, y_max=3.0)
    with pytest.raises(ValueError):
        sp.f_of_operator_diag(pd, bump_profile, 40.0, c=1.0)
