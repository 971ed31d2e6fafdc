import numpy as np

from lspec import jets


def scalar_field(coords):
    x, y = coords
    return jets.sin(x) * jets.exp(0.3 * y) + jets.sqrt(1.0 + x * x) / (2.0 + jets.cos(y))


def test_directional_derivatives_match_finite_differences():
    pts = np.array([[0.3, -0.7], [1.1, 0.4]])
    v = np.array([0.6, -0.8])
    seeded = jets.seed(pts, v, 2)
    out = scalar_field(seeded)

    def f(p):
        x, y = p[:, 0], p[:, 1]
        return np.sin(x) * np.exp(0.3 * y) + np.sqrt(1 + x * x) / (2 + np.cos(y))

    h = 1e-6
    fd1 = (f(pts + h * v) - f(pts - h * v)) / (2 * h)
    assert np.allclose(out.c[1], fd1, atol=1e-9)
    h = 1e-4  # second difference is roundoff-limited below this
    fd2 = (f(pts + h * v) - 2 * f(pts) + f(pts - h * v)) / (h * h)
    assert np.allclose(2 * out.c[2], fd2, atol=1e-6)


def test_metric_derivatives_exact_mixed_partials():
    def metric_fn(coords):
        t, x = coords
        one = t * 0 + 1.0
        g01 = 0.1 * jets.sin(t * x)
        return [[jets.exp(0.2 * t * t) * one, g01], [g01, -(1.0 + 0.5 * x * x)]]

    X = np.array([[0.4, -0.3]])
    g, dg, d2g = jets.metric_derivatives(metric_fn, X, 2)
    h = 1e-5

    def eval_g(p):
        t, x = p
        return np.array(
            [
                [np.exp(0.2 * t * t), 0.1 * np.sin(t * x)],
                [0.1 * np.sin(t * x), -(1 + 0.5 * x * x)],
            ]
        )

    p = X[0]
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (eval_g(p + e) - eval_g(p - e)) / (2 * h)
        assert np.allclose(dg[0, k], fd, atol=1e-8)
    ek, el = np.array([h, 0.0]), np.array([0.0, h])
    fd_mixed = (eval_g(p + ek + el) - eval_g(p + ek - el) - eval_g(p - ek + el) + eval_g(p - ek - el)) / (4 * h * h)
    assert np.allclose(d2g[0, 0, 1], fd_mixed, atol=1e-5)


def test_division_and_log_recurrences():
    x = jets.Taylor([np.array(0.7), np.array(1.0), np.array(0.0), np.array(0.0)])
    y = jets.log(1.0 + x * x)
    h = 1e-6

    def f(t):
        return np.log(1 + t * t)

    fd1 = (f(0.7 + h) - f(0.7 - h)) / (2 * h)
    assert abs(float(y.c[1]) - fd1) < 1e-9
