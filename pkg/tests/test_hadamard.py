import inspect

import numpy as np
import pytest

from lspec import geomkit as gk, hadamard as hd
from lspec.errors import GridError


def test_u0_normalization_and_invariant(sphere_chart):
    rng = np.random.default_rng(0)
    Y = rng.normal(size=(20, 4))
    Y *= rng.uniform(0.01, 0.9, size=(20, 1)) * sphere_chart.radius / np.linalg.norm(Y, axis=1, keepdims=True)
    u0 = hd.u0(sphere_chart, Y)
    # u_0 * |g|^(1/4) = 1
    assert np.abs(u0 * sphere_chart.density(Y) ** 0.5 - 1).max() <= 1e-8
    assert abs(hd.u0(sphere_chart, np.zeros((1, 4)))[0] - 1.0) <= 1e-12


def test_u0_minkowski_identically_one():
    chart = gk.normal_chart(gk.make_minkowski(), np.zeros(4))
    rng = np.random.default_rng(1)
    Y = rng.normal(size=(10, 4))
    Y *= 0.8 * chart.radius / np.linalg.norm(Y, axis=1, keepdims=True)
    assert np.abs(hd.u0(chart, Y) - 1.0).max() <= 1e-9


def test_h_function_vs_divergence_oracle(sphere_chart, sphere_seq):
    fields = sphere_seq.fields
    rng = np.random.default_rng(2)
    Y = rng.normal(size=(12, 4))
    Y *= rng.uniform(0.2, 0.85, size=(12, 1)) * fields.a / np.linalg.norm(Y, axis=1, keepdims=True)
    h_ray = hd.h_function(sphere_chart, Y)
    eta = gk.minkowski_eta(4)
    h_div = np.einsum("bj,jk,bk->b", fields.b_vector(Y), eta, Y)
    assert np.abs(h_ray - h_div).max() <= 1e-6
    # h vanishes at the origin
    assert abs(hd.h_function(sphere_chart, np.zeros((1, 4)))[0]) <= 1e-12


def test_h_minkowski_zero():
    chart = gk.normal_chart(gk.make_minkowski(), np.zeros(4))
    Y = 0.3 * chart.radius * np.eye(4)
    assert np.abs(hd.h_function(chart, Y)).max() <= 1e-9


def test_transport_minkowski_trivial():
    chart = gk.normal_chart(gk.make_minkowski(), np.zeros(4))
    seq = hd.hadamard_sequence(chart, 3)
    assert np.abs(seq.diag - np.array([1, 0, 0, 0])).max() <= 1e-9
    assert np.abs(seq.tables[1].values).max() <= 1e-9


def test_u1_diag_equals_minus_Pu0(sphere_seq):
    fields = sphere_seq.fields
    Pu0 = fields.apply_P(fields.u0)(np.zeros((1, 4)))[0]
    assert abs(sphere_seq.diag[1] + Pu0) <= 1e-6 * max(1.0, abs(Pu0))


def test_u1_curvature_identity(sphere_metric, sphere_base, sphere_seq):
    rg = gk.curvature(sphere_metric, sphere_base).scalar
    assert abs(sphere_seq.diag[1] + rg / 6) <= 1e-3 * max(1.0, abs(rg))


def test_u1_curvature_identity_expanding():
    m = gk.make_expanding()
    chart = gk.normal_chart(m, np.zeros(4))
    seq = hd.hadamard_sequence(chart, 1)
    rg = gk.curvature(m, np.zeros(4)).scalar
    assert abs(seq.diag[1] + rg / 6) <= 1e-3 * max(1.0, abs(rg))


def test_transport_residuals(sphere_seq):
    for k in (1, 2):
        res = hd.transport_residual(sphere_seq, k)
        scale = max(1.0, float(np.abs(sphere_seq.tables[k].values).max()))
        assert res.max() <= 1e-3 * scale


def test_diag_direction_spread(sphere_seq):
    assert hd.diag_direction_spread(sphere_seq, 1) <= 1e-3


def test_order_cap():
    chart = gk.normal_chart(gk.make_minkowski(), np.zeros(4))
    with pytest.raises(GridError):
        hd.hadamard_sequence(chart, 4)


def test_coefficients_take_no_spectral_parameters():
    # the transport coefficients never see z or the mass
    for fn in (hd.transport_step, hd.hadamard_sequence, hd.u0, hd.h_function):
        params = inspect.signature(fn).parameters
        assert "z" not in params and "mass" not in params and "m" not in params


def test_default_directions_count():
    dirs = hd.default_directions(4)
    assert dirs.shape == (2 * 4 * 3, 4)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
