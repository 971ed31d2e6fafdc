import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lspec import geomkit as gk
from lspec.acceptance import fd_curvature_oracle
from lspec.errors import BranchError, DomainError, RadiusError, SignatureError


def test_minkowski_curvature_flat():
    cp = gk.curvature(gk.make_minkowski(), np.array([0.3, -1.0, 0.5, 2.0]))
    assert abs(cp.scalar) <= 1e-10
    assert np.abs(cp.riemann).max() <= 1e-10


def test_sphere_curvature_vs_fd_oracle(sphere_metric, sphere_base):
    cp = gk.curvature(sphere_metric, sphere_base)
    oracle = fd_curvature_oracle(sphere_metric, sphere_base)
    assert abs(cp.scalar - oracle) <= 1e-5


def test_expanding_curvature_vs_fd_oracle():
    m = gk.make_expanding()
    cp = gk.curvature(m, np.zeros(4))
    oracle = fd_curvature_oracle(m, np.zeros(4))
    assert abs(cp.scalar - oracle) <= 1e-5


def test_curvature_tensor_symmetries(sphere_metric, sphere_base):
    cp = gk.curvature(sphere_metric, sphere_base)
    R = cp.riemann
    assert np.abs(R + np.transpose(R, (1, 0, 2, 3))).max() <= 1e-8
    assert np.abs(R + np.transpose(R, (0, 1, 3, 2))).max() <= 1e-8
    bianchi = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    assert np.abs(bianchi).max() <= 1e-8
    ginv = np.linalg.inv(sphere_metric.eval(sphere_base))
    assert abs(cp.scalar - np.einsum("jl,jl->", ginv, cp.ricci)) <= 1e-12


def test_curvature_errors():
    m = gk.make_minkowski()
    with pytest.raises(DomainError):
        gk.curvature(m, m.patch.hi)  # stencil leaves the patch

    def bad_fn(coords):
        one = coords[0] * 0 + 1.0
        zero = one * 0.0
        return [[one, zero, zero, zero], [zero, one, zero, zero],
                [zero, zero, -one, zero], [zero, zero, zero, -one]]

    bad = gk.MetricField(dim=4, fn=bad_fn, patch=m.patch, name="bad")
    with pytest.raises(SignatureError):
        gk.curvature(bad, np.zeros(4))


def test_exp_map_flat_straight_lines():
    m = gk.make_minkowski()
    x = np.array([0.1, 0.2, 0.3, 0.4])
    v = np.array([1.0, -0.5, 0.2, 0.3])
    assert np.abs(gk.exp_map(m, x, v) - (x + v)).max() <= 1e-12


def test_exp_map_arclength_oracle(sphere_metric, sphere_base):
    # geodesic distance along a purely spatial shot equals the h-arclength
    # of the returned path (independent quadrature oracle)
    frame = gk.frame_at(sphere_metric, sphere_base)
    ell = 0.21
    v = frame.vectors @ np.array([0.0, ell, 0.0, 0.0])
    end, path = gk.exp_map(sphere_metric, sphere_base, v, path_samples=4001)
    # arclength of the spatial projection in the (negative-definite) h part
    seglen = 0.0
    for a, b in zip(path[:-1], path[1:]):
        mid = 0.5 * (a + b)
        g = sphere_metric.eval(mid)
        d = b - a
        seglen += np.sqrt(abs(d @ g @ d))
    assert abs(seglen - ell) <= 1e-8


def test_exp_map_scaling_reparametrization():
    m = gk.make_expanding()
    x = np.zeros(4)
    v = np.array([0.12, 0.2, -0.1, 0.05])
    t = 0.5
    end_half, path = gk.exp_map(m, x, v, path_samples=3)
    mid_direct = gk.exp_map(m, x, t * v)
    sol = solve_ivp(
        lambda s, y: gk._geodesic_rhs(m, s, y),
        (0, t),
        np.concatenate([x, v]),
        rtol=1e-10,
        atol=1e-10,
    )
    assert np.abs(sol.y[:4, -1] - mid_direct).max() <= 1e-9


def test_exp_map_escape():
    m = gk.make_minkowski()
    with pytest.raises(gk.EscapeError):
        gk.exp_map(m, np.zeros(4), np.array([100.0, 0, 0, 0]))


def test_inverse_exp_shooting(sphere_metric, sphere_base, sphere_chart):
    rng = np.random.default_rng(5)
    for _ in range(3):
        y = rng.normal(size=4)
        y *= 0.5 * sphere_chart.radius / np.linalg.norm(y)
        p = sphere_chart.to_manifold(y[None, :])[0]
        v = gk.inverse_exp(sphere_metric, sphere_base, p)
        assert np.abs(gk.exp_map(sphere_metric, sphere_base, v) - p).max() <= 1e-8


def test_frame_orthonormal(sphere_metric, sphere_base):
    fr = gk.frame_at(sphere_metric, sphere_base)
    g = sphere_metric.eval(sphere_base)
    gram = fr.vectors.T @ g @ fr.vectors
    assert np.abs(gram - gk.minkowski_eta(4)).max() <= 1e-10
    assert fr.vectors[0, 0] > 0  # future-directed


def test_chart_minkowski_is_eta():
    m = gk.make_minkowski()
    chart = gk.normal_chart(m, np.zeros(4))
    rng = np.random.default_rng(0)
    Y = rng.normal(size=(10, 4))
    Y *= rng.uniform(0.1, 0.95, size=(10, 1)) * chart.radius / np.linalg.norm(Y, axis=1, keepdims=True)
    gt = chart.pulled_metric(Y)
    assert np.abs(gt - gk.minkowski_eta(4)[None]).max() <= 1e-8


def test_chart_origin_exact(sphere_chart):
    gt0 = sphere_chart.pulled_metric(np.zeros((1, 4)))[0]
    assert np.abs(gt0 - gk.minkowski_eta(4)).max() <= 1e-10


def test_chart_radial_identity(sphere_chart):
    rng = np.random.default_rng(2)
    dirs = rng.normal(size=(25, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    Y = dirs * rng.uniform(0.02, 0.95, size=(25, 1)) * sphere_chart.radius
    gt = sphere_chart.pulled_metric(Y)
    eta = gk.minkowski_eta(4)
    for i in range(len(Y)):
        y = Y[i]
        assert np.abs(gt[i] @ y - eta @ y).max() <= 1e-7 * (1 + np.linalg.norm(y))


def test_chart_taylor_identity(sphere_chart, sphere_metric, sphere_base):
    # g_ij(y) - eta_ij - (1/3) R_ikjl y^k y^l = O(|y|^3)
    cp = gk.curvature(sphere_metric, sphere_base)
    E = sphere_chart.frame.vectors
    Rf = np.einsum("ijkl,ia,jb,kc,ld->abcd", cp.riemann, E, E, E, E)
    rng = np.random.default_rng(3)
    y = rng.normal(size=4)
    y *= 1e-2 / np.linalg.norm(y)
    gt = sphere_chart.pulled_metric(y[None, :])[0]
    pred = gk.minkowski_eta(4) + np.einsum("ikjl,k,l->ij", Rf, y, y) / 3.0
    assert np.abs(gt - pred).max() <= 1e-5


def test_metric_taylor2(sphere_chart, sphere_metric, sphere_base):
    C = gk.metric_taylor2(sphere_chart)
    cp = gk.curvature(sphere_metric, sphere_base)
    E = sphere_chart.frame.vectors
    Rf = np.einsum("ijkl,ia,jb,kc,ld->abcd", cp.riemann, E, E, E, E)
    T = np.transpose(Rf, (0, 2, 1, 3))
    pred = 0.5 * (T + np.transpose(T, (0, 1, 3, 2))) / 3.0
    assert np.abs(C - pred).max() <= 1e-4
    # eta-trace contraction gives -(1/3) Ric
    eta = gk.minkowski_eta(4)
    tr = np.einsum("ij,ijkl->kl", eta, C)
    ric_f = E.T @ cp.ricci @ E
    assert np.abs(tr + ric_f / 3.0).max() <= 1e-4


def test_metric_taylor2_flat_zero():
    chart = gk.normal_chart(gk.make_minkowski(), np.zeros(4))
    C = gk.metric_taylor2(chart)
    assert np.abs(C).max() <= 1e-8


def test_requested_radius_too_large(sphere_metric, sphere_base):
    with pytest.raises(RadiusError):
        gk.normal_chart(sphere_metric, sphere_base, radius=50.0)


def test_metric_derivative_orders(sphere_metric, sphere_base):
    # exposed derivatives agree with central finite differences of eval
    x = sphere_base
    h = 2e-3
    for idx in [(1,), (2, 2), (1, 2, 2), (2, 2, 2, 2)]:
        d = sphere_metric.derivative(x, idx)
        e = np.zeros(4)
        e[idx[0]] = h
        if len(idx) == 1:
            fd = (sphere_metric.eval(x + e) - sphere_metric.eval(x - e)) / (2 * h)
        else:
            fd = (
                sphere_metric.derivative(x + e, idx[1:]) - sphere_metric.derivative(x - e, idx[1:])
            ) / (2 * h)
        scale = max(1.0, np.abs(d).max())
        assert np.abs(d - fd).max() <= 1e-5 * scale


def test_table_metric_roundtrip(tmp_path):
    src = gk.make_expanding()
    dims = [7, 5, 5, 5]
    box = gk.Box(lo=np.array([-0.6, -1.0, -1.0, -1.0]), hi=np.array([0.6, 1.0, 1.0, 1.0]))
    axes = [np.linspace(box.lo[i], box.hi[i], dims[i]) for i in range(4)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    samples = src.eval(grid.reshape(-1, 4)).reshape(tuple(dims) + (4, 4))

    for binary, name in ((True, "m.lsm"), (False, "m.txt")):
        path = str(tmp_path / name)
        gk.write_table_metric(path, box, dims, samples, binary=binary)
        loaded = gk.load_metric(path)
        x = np.array([0.05, 0.2, -0.1, 0.3])
        assert np.abs(loaded.eval(x) - src.eval(x)).max() <= 1e-4
        cp = gk.curvature(loaded, np.array([0.0, 0.0, 0.0, 0.0]))
        assert abs(cp.scalar - (-12.0)) <= 0.5  # cubic-interpolant accuracy


def test_table_metric_bad_magic(tmp_path):
    p = tmp_path / "junk.lsm"
    p.write_bytes(b"NOT-A-METRIC-FILE" + b"\x00" * 64)
    with pytest.raises(DomainError):
        gk.load_table_metric(str(p))


def test_load_metric_names():
    for name in ("minkowski", "ultrastatic-torus", "ultrastatic-sphere", "expanding"):
        m = gk.load_metric(name)
        assert m.dim == 4
    m = gk.load_metric("ultrastatic-sphere:2.0")
    cp = gk.curvature(m, gk.BUILTIN_BASEPOINTS["ultrastatic-sphere"])
    assert abs(cp.scalar - (-6.0 / 4.0)) <= 1e-8  # R_g = -6/r^2
