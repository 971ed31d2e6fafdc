from math import factorial, gamma as rgamma

import numpy as np
import pytest

from lspec import elemfam as ef
from lspec.errors import BranchError, DomainError, PoleError


def test_euclid_value_n4():
    mv = ef.euclid_integral(3, -1.0 + 0j, 4, verify=True)
    assert abs(mv.value - np.pi ** 2 / 2) <= 1e-10


def test_euclid_series_oracle_complex():
    for alpha, z in ((2.3 + 0.4j, 2j - 1), (1.7, -2.0 + 0j), (3.1, -1 + 1j)):
        mv = ef.euclid_integral(alpha, z, 4)
        oracle = ef.euclid_series_oracle(alpha, z, 4)
        assert abs(mv.value - oracle) <= 1e-7 * max(1.0, abs(mv.value))


def test_euclid_residues():
    for k in (1, 2):
        for z in (-1.0 + 0j, 2j - 1):
            mv = ef.euclid_integral(k, z, 4)
            pred = z ** (2 - k) * np.pi ** 2 / (factorial(2 - k) * rgamma(k))
            assert mv.pole_order == 1
            assert abs(mv.residue - pred) <= 1e-12 * max(1.0, abs(pred))


def test_euclid_decay_in_alpha():
    vals = [abs(ef.euclid_integral(a, -1.0 + 0j, 4).value) for a in (5.0, 9.0, 14.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2


def test_euclid_branch_error():
    with pytest.raises(BranchError):
        ef.euclid_integral(2.5, 1.0 + 0j, 4)


def test_fa_diag_value_n4():
    mv = ef.fa_diag(2, 1j, 4)
    assert abs(mv.value - (-1 / (16 * np.pi ** 2))) <= 1e-14


def test_fa_diag_scaling_homogeneity():
    a, z, lam = 2.7 + 0.3j, 0.5 + 2j, 1.7
    lhs = ef.fa_diag(a, lam ** 2 * z, 4).value * lam ** (2 * (a + 1) - 4)
    assert abs(lhs - ef.fa_diag(a, z, 4).value) <= 1e-14


def test_fa_diag_conjugation_symmetry():
    for a in (1.6, 2.9):
        for y in (0.5, 2.0):
            upper = ef.fa_diag(a, 1j * y, 4).value
            lower = ef.fa_diag(a, -1j * y, 4).value
            assert abs(np.conj(upper) - lower) <= 1e-10


def test_fa_diag_laurent_consistency():
    mv = ef.fa_diag(1.0, 2j, 4)
    assert mv.pole_order == 1
    for d in (1e-3, 1e-4):
        for direction in (1, 1j, -1, -1j):
            lhs = ef.fa_diag(1.0 + d * direction, 2j, 4).value
            approx = mv.analytic_part + mv.residue / (d * direction)
            assert abs(lhs - approx) <= 30 * d


def test_fa_diag_residue_direction_mean():
    # mean over 4 symmetric approach directions converges at O(delta^2)
    mv = ef.fa_diag(1.0, 2j, 4)
    d = 1e-4
    vals = [d * w * ef.fa_diag(1.0 + d * w, 2j, 4).value for w in (1, 1j, -1, -1j)]
    assert abs(np.mean(vals) - mv.residue) <= 1e-6 * abs(mv.residue)


def test_fa_diag_wick_residue_identity():
    # Res_{a = n/2 - m} Gamma(a+m)^{-1} fa_diag(a+m-1, +-z) = +-i/(2^n pi^(n/2) (n/2-1)!)
    from scipy.special import gamma as cgamma

    n = 4
    z = 1.3 + 0.8j
    for m in (0, 1, 2):
        a0 = n / 2 - m
        mv = ef.fa_diag(a0 + m - 1, z, n)
        res = mv.residue / cgamma(a0 + m)
        pred = 1j / (2 ** n * np.pi ** (n / 2) * factorial(n // 2 - 1))
        assert abs(res - pred) <= 1e-14
        mv_low = ef.fa_diag(a0 + m - 1, -z, n)  # lower half-plane branch
        res_low = mv_low.residue / cgamma(a0 + m)
        assert abs(res_low + pred) <= 1e-14


def test_fa_diag_pole_guard():
    mv = ef.fa_diag(1.0 + 1e-9, 2j, 4)
    assert mv.pole_order == 1
    with pytest.raises(PoleError):
        _ = mv.value
    with pytest.raises(BranchError):
        ef.fa_diag(2.0, 0j, 4)


def test_fa_offdiag_decay_in_imz():
    vals = [abs(ef.fa_offdiag(1.3, 1j * y, -2.0, 4)) for y in (1.0, 4.0, 16.0)]
    assert vals[0] > vals[1] > vals[2]
    # O((Im z)^-2) or faster, with an O(1) constant
    assert vals[2] <= 5.0 * vals[0] / 16.0 ** 2


def test_fa_offdiag_continuity_to_diagonal():
    a = 3.6
    dv = ef.fa_diag(a, 2j, 4).value
    for q in (1e-4, -1e-4):
        ov = ef.fa_offdiag(a, 2j, q, 4)
        assert abs(ov - dv) / abs(dv) <= 1e-3


def test_fa_offdiag_domain_errors():
    with pytest.raises(DomainError):
        ef.fa_offdiag(2.0, -1j, 1.0, 4)
    with pytest.raises(DomainError):
        ef.fa_offdiag(2.0, 2j, 0.0, 4)


def test_pde_identity_spacelike_grid():
    pts = np.array(
        [[0.2, 1.0, 0.3, -0.2], [0.1, -0.8, 0.7, 0.4], [-0.25, 0.5, -0.9, 0.6]]
    )
    for a, z in ((2.0, 2j), (3.5, 1 + 2j)):
        out = ef.pde_check(a, z, 4, pts)
        assert out["relative_pde_residual"] <= 1e-3
        assert out["max_gradient_residual"] <= 1e-3 * out["scale"] + 1e-6


def test_pde_alpha_zero_fundamental_solution():
    pts = np.array([[0.2, 1.0, 0.3, -0.2]])
    out = ef.pde_check(0.0, 2j, 4, pts)
    assert out["max_pde_residual"] <= 1e-3 * out["scale"]


def test_pde_check_lightcone_guard():
    with pytest.raises(DomainError):
        ef.pde_check(2.0, 2j, 4, np.array([[1.0, 1.0, 0.0, 0.0]]))


def test_bernstein_check():
    pt = np.array([0.2, 1.1, 0.4, -0.3])
    out = ef.bernstein_check(4.0, 3j, 4, pt)
    assert out["status"] == "ok"
    assert out["relative_residual"] <= 1e-2
    # stability spot-check at another z of the same order
    out6 = ef.bernstein_check(4.0, 6j, 4, pt)
    assert out6["relative_residual"] <= 1e-2


def test_bernstein_prefactor_zero():
    out = ef.bernstein_check(0.0, 3j, 4, np.array([0.2, 1.1, 0.4, -0.3]))
    assert out["status"] == "prefactor-zero"


def test_odd_dimension_rejected():
    from lspec.errors import DimensionError

    with pytest.raises(DimensionError):
        ef.fa_diag(2.0, 1j, 3)
