import numpy as np
import pytest

from lspec import contour as ct
from lspec.elemfam import fa_diag
from lspec.errors import PoleError, TailError


def test_open_contour_of_residue_free_integrand_vanishes():
    spec = ct.ContourSpec(kind="gamma_eps", eps=1.0, zmax=1e11)
    val, _ = ct.quadrature(lambda z: (z - 3j) ** (-2.0), spec, decay=1.0, tol=1e-12)
    assert abs(val) <= 1e-9


def test_pole_pair_residue_oracle():
    spec = ct.ContourSpec(kind="gamma_eps", eps=0.5, zmax=1e11)
    val, _ = ct.quadrature(lambda z: 1 / ((z + 1j) * (z - 2j)), spec, decay=1.0, tol=1e-12)
    assert abs(val - 2j * np.pi / (3j)) <= 1e-9


def test_misdeclared_decay_raises():
    with pytest.raises(TailError):
        ct.quadrature(lambda z: 1 / (1 + abs(z)) ** 0.3, ct.ContourSpec(eps=1.0, zmax=1e4), decay=2.0)


def test_contour_kinds_validation():
    with pytest.raises(ValueError):
        ct.ContourSpec(kind="eta_delta", theta=np.pi / 4)
    with pytest.raises(ValueError):
        ct.ContourSpec(kind="gamma_eps", theta=2.0)
    ct.ContourSpec(kind="eta_delta", eps=0.5, theta=2.0)
    ct.ContourSpec(kind="gamma_0", eps=0.0, theta=np.pi / 4)


def test_theta_independence():
    vals = []
    for th in (np.pi / 6, np.pi / 4, np.pi / 3):
        v, _ = ct.quadrature(
            lambda z: 1 / ((z + 1j) * (z - 2j)),
            ct.ContourSpec(eps=0.5, theta=th, zmax=1e11),
            decay=1.0,
            tol=1e-12,
        )
        vals.append(v)
    assert max(abs(v - vals[0]) for v in vals) <= 1e-8


def test_eps_shift_consistency():
    # fixed integrand (regulator kept at 0.5), contour eps varied
    vals = []
    for ceps in (0.5, 0.25):
        spec = ct.ContourSpec(eps=ceps, zmax=1e8)
        v, _ = ct.quadrature(
            lambda z: (0.5 + 1j * z) ** (-2.2) * (2.0 - z) ** (-1.0), spec, decay=2.2, tol=1e-11
        )
        vals.append(v / (2j * np.pi))
    assert abs(vals[0] - vals[1]) <= 1e-6


@pytest.mark.parametrize("alpha", [1.5, 2.3, 3.7])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_power_identity(alpha, k):
    for eps in (0.1, 1.0):
        for q in (2.0, -3.0):
            assert ct.power_identity_check(alpha, k, eps, q) <= 1e-8


def test_power_identity_cauchy_limit():
    # k=0, alpha -> 1: the combinatorial factor is 1, plain Cauchy formula
    assert ct.power_identity_check(1.0 + 1e-9, 0, 1.0, 2.0) <= 1e-6


def test_fa_contour_power_verify():
    mv, gap = ct.fa_contour_power(3.5, 2, 0.3, 1.0, 4, verify=True)
    assert gap <= 1e-6
    mv3, gap3 = ct.fa_contour_power(2.6, 3, 0.4, 1.0, 4, verify=True)
    assert gap3 <= 1e-6


def test_fa_contour_power_verify_rejects_divergent_diagonal():
    with pytest.raises(PoleError):
        ct.fa_contour_power(3.5, 0, 0.3, 1.0, 4, verify=True)


def test_fa_contour_power_telescopes_to_F1():
    mv, _ = ct.fa_contour_power(1.0, 1, 0.3, 1.0, 4)
    tgt = fa_diag(1.0, -1.0 + 0.3j, 4)
    assert mv.pole_order == tgt.pole_order == 1
    assert abs(mv.residue - tgt.residue) <= 1e-14
    assert abs(mv.analytic_part - tgt.analytic_part) <= 1e-14


def test_fa_contour_power_massless_regulated():
    mv, _ = ct.fa_contour_power(2.5, 0, 0.5, 0.0, 4)
    assert np.isfinite(mv.analytic_part.real) and np.isfinite(mv.analytic_part.imag)
