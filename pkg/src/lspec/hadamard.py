"""Transport hierarchy for Hadamard coefficients in a normal chart.

The coefficients u_k solve  2k u_k + h u_k + 2 rho u_k + 2 P u_{k-1} = 0
with u_0(0) = 1, where rho = y^k d_k is the Euler field, h = rho log|g|^(1/2)
and P = d_j g^{jk} d_k + b^j d_j in normal coordinates.  Along a ray y = t v
the exact integrating-factor solution is

    u_k(t v) = -t^(-k) |g(t v)|^(-1/4) * int_0^t s^(k-1) |g(s v)|^(1/4)
               (P u_{k-1})(s v) ds,

regular at t = 0 with u_k(0) = -(P u_{k-1})(0)/k.

The pulled-back fields (inverse metric, density powers, b^j) are collocated
once on a tensor Chebyshev grid inscribed in the chart ball; P is applied by
exact differentiation of the collocation models, and the radial quadrature
is Gauss-Legendre.  Field values on the fixed collocation/segment clouds are
cached so that each transport level only pays for the new u-derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .chebfit import ChebModel, cheb_nodes
from .errors import DomainError, GridError
from .geomkit import NormalChart, minkowski_eta

__all__ = [
    "HadamardSequence",
    "HadamardTable",
    "ChartFields",
    "u0",
    "h_function",
    "transport_step",
    "hadamard_sequence",
    "transport_residual",
    "diag_direction_spread",
    "default_directions",
]

FIELD_DEGREE = 8
QUAD_NODES = 16


def default_directions(n: int) -> np.ndarray:
    """The 2n(n-1) signed coordinate-pair directions (e_i +- e_j)/sqrt(2)."""
    dirs = []
    for i in range(n):
        for j in range(i + 1, n):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = np.zeros(n)
                    v[i], v[j] = si, sj
                    dirs.append(v / np.sqrt(2.0))
    return np.array(dirs)


def u0(chart: NormalChart, y) -> np.ndarray:
    """u_0(y) = |g(y)|^(-1/4); the base-point factor is 1 by normalization."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if np.any(np.linalg.norm(y, axis=1) >= chart.radius):
        raise DomainError("u0 evaluated outside the chart ball")
    return chart.density(y) ** (-0.5)


def h_function(chart: NormalChart, y, rel_step: float = 5e-3) -> np.ndarray:
    """h(y) = t d/dt log|g(t v)|^(1/2), by differentiating the density along the ray."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = np.linalg.norm(y, axis=1)
    out = np.zeros(len(y))
    mask = t > 0
    if not np.any(mask):
        return out
    v = y[mask] / t[mask, None]
    dt = rel_step * chart.radius
    ts = t[mask][:, None] + dt * np.array([-2.0, -1.0, 1.0, 2.0])[None, :]
    if np.any(ts <= 0) or np.any(ts >= chart.radius):
        raise DomainError("ray stencil leaves the chart; reduce |y| or rel_step")
    pts = (ts[:, :, None] * v[:, None, :]).reshape(-1, y.shape[1])
    ld = np.log(chart.density(pts)).reshape(-1, 4)
    dlog = (ld[:, 0] - 8 * ld[:, 1] + 8 * ld[:, 2] - ld[:, 3]) / (12 * dt)
    out[mask] = t[mask] * dlog
    return out


class ChartFields:
    """Chebyshev collocation models of the pulled-back fields on the chart.

    The tensor box [-a, a]^n is inscribed in the chart ball (2a <= radius),
    so every node is a legitimate chart point.  The exponential map is
    collocated once (one geodesic per node) and its Jacobian obtained by
    exact differentiation of that model.
    """

    def __init__(self, chart: NormalChart, degree: int = FIELD_DEGREE, quad_nodes: int = QUAD_NODES):
        self.chart = chart
        n = chart.metric.dim
        self.n = n
        self.degree = degree
        self.a = 0.98 * chart.radius / 2.0
        nodes = cheb_nodes(degree, self.a)
        grids = np.meshgrid(*([nodes] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        self.node_pts = pts
        shape = [degree + 1] * n

        from .geomkit import _geodesic_batch

        V = pts @ chart.frame.vectors.T
        X = _geodesic_batch(chart.metric, chart.base, V)
        emods = [ChebModel.from_values(X[:, mu].reshape(shape), self.a) for mu in range(n)]
        J = np.empty((len(pts), n, n))  # J[:, mu, i] = d exp^mu / d y^i
        for mu in range(n):
            for i in range(n):
                J[:, mu, i] = emods[mu].derivative(i)(pts)
        g = chart.metric.eval(X)
        gt = np.einsum("bai,bac,bcj->bij", J, g, J)
        ginv_vals = np.linalg.inv(gt)
        dens2 = np.sqrt(np.abs(np.linalg.det(gt)))  # |g|^(1/2)

        def mk(vals):
            return ChebModel.from_values(np.asarray(vals).reshape(shape), self.a)

        self.ginv = [[mk(ginv_vals[:, i, j]) for j in range(n)] for i in range(n)]
        self.dens2 = mk(dens2)
        self.u0 = mk(dens2 ** -0.5)
        self.quarter = mk(np.sqrt(dens2))
        # b^j = |g|^(-1/2) g^{jk} d_k |g|^(1/2), collocated as its own model
        grad = np.stack([self.dens2.derivative(k)(pts) for k in range(n)], axis=1)
        b_vals = np.einsum("bjk,bk->bj", ginv_vals, grad) / dens2[:, None]
        self.b = [mk(b_vals[:, j]) for j in range(n)]
        # first-order coefficients of P in divergence form:
        # P u = g^{jk} d_j d_k u + c^k d_k u,  c^k = d_j g^{jk} + b^k
        c_vals = np.zeros((len(pts), n))
        for k in range(n):
            for j in range(n):
                c_vals[:, k] += self.ginv[j][k].derivative(j)(pts)
        c_vals += b_vals
        self.c = [mk(c_vals[:, k]) for k in range(n)]

        # fixed segment cloud for the radial quadratures: one Gauss-Legendre
        # rule per collocation node, along its own ray from the origin
        xg, wg = np.polynomial.legendre.leggauss(quad_nodes)
        t = np.linalg.norm(pts, axis=1)
        tpos = np.where(t > 1e-14, t, 1.0)
        vdir = pts / tpos[:, None]
        s = 0.5 * tpos[:, None] * (xg + 1.0)[None, :]  # (N, Q)
        self.seg_w = 0.5 * tpos[:, None] * wg[None, :]
        self.seg_s = s
        self.seg_pts = (s[:, :, None] * vdir[:, None, :]).reshape(-1, n)
        self.node_t = t
        self._cloud_cache = {}

    def field_cloud(self, key, pts):
        """Cache u-independent field values on a named point cloud."""
        if key in self._cloud_cache:
            return self._cloud_cache[key]
        n = self.n
        cloud = {
            "pts": pts,
            "ginv": np.stack(
                [np.stack([self.ginv[j][k](pts) for k in range(n)], axis=1) for j in range(n)],
                axis=1,
            ),
            "c": np.stack([self.c[k](pts) for k in range(n)], axis=1),
            "quarter": self.quarter(pts),
            "u0": self.u0(pts),
        }
        self._cloud_cache[key] = cloud
        return cloud

    def b_vector(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.stack([self.b[j](pts) for j in range(self.n)], axis=1)

    def h(self, pts) -> np.ndarray:
        """h = rho log|g|^(1/2) through the density model."""
        pts = np.atleast_2d(pts)
        dens = self.dens2(pts)
        grad = np.stack([self.dens2.derivative(k)(pts) for k in range(self.n)], axis=1)
        return np.einsum("bk,bk->b", pts, grad) / dens

    def apply_P_on_cloud(self, umodel: ChebModel, cloud) -> np.ndarray:
        """P u on a cached cloud: g^{jk} d_j d_k u + c^k d_k u."""
        n = self.n
        pts = cloud["pts"]
        du = [umodel.derivative(k) for k in range(n)]
        duv = np.stack([du[k](pts) for k in range(n)], axis=1)
        acc = np.einsum("bk,bk->b", cloud["c"], duv)
        for j in range(n):
            for k in range(j, n):
                w = 1.0 if j == k else 2.0
                acc += w * cloud["ginv"][:, j, k] * du[j].derivative(k)(pts)
        return acc

    def apply_P(self, umodel: ChebModel):
        """P u = d_j(g^{jk} d_k u) + b^j d_j u as a point function."""

        def Pu(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            n = self.n
            cloud = {
                "pts": pts,
                "ginv": np.stack(
                    [np.stack([self.ginv[j][k](pts) for k in range(n)], axis=1) for j in range(n)],
                    axis=1,
                ),
                "c": np.stack([self.c[k](pts) for k in range(n)], axis=1),
            }
            return self.apply_P_on_cloud(umodel, cloud)

        return Pu


@dataclass
class HadamardTable:
    """u_k sampled on (direction x radius) with its collocation model."""

    k: int
    directions: np.ndarray  # (D, n)
    radii: np.ndarray  # (R,)
    values: np.ndarray  # (D, R)
    model: ChebModel


@dataclass
class HadamardSequence:
    chart: NormalChart
    order: int
    tables: List[HadamardTable]
    diag: np.ndarray
    fields: ChartFields = field(repr=False, default=None)

    @property
    def values(self):
        return [t.values for t in self.tables]


def _gauss_radii(r_max: float, m: int = QUAD_NODES):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * r_max * (x + 1.0), 0.5 * r_max * w


def _table_points(directions, radii):
    return (radii[None, :, None] * directions[:, None, :]).reshape(-1, directions.shape[1])


def _u0_table(fields: ChartFields, directions, radii) -> HadamardTable:
    pts = _table_points(directions, radii)
    vals = fields.u0(pts).reshape(len(directions), len(radii))
    return HadamardTable(0, directions, radii, vals, fields.u0)


def _next_model(fields: ChartFields, k: int, u_prev_model: ChebModel) -> ChebModel:
    """Collocate u_k on the node grid from the integrating-factor formula.

    P u_{k-1} and the quadrature weight |g|^(1/4) are first collocated as a
    single product model at the nodes, so the segment cloud needs only one
    model evaluation per level.
    """
    shape = [fields.degree + 1] * fields.n
    node_cloud = fields.field_cloud("nodes", fields.node_pts)
    Pu_nodes = fields.apply_P_on_cloud(u_prev_model, node_cloud)
    G = ChebModel.from_values((node_cloud["quarter"] * Pu_nodes).reshape(shape), fields.a)
    integrand = (fields.seg_s ** (k - 1)) * G(fields.seg_pts).reshape(fields.seg_s.shape)
    totals = np.sum(integrand * fields.seg_w, axis=1)
    t = fields.node_t
    vals = np.empty(len(t))
    pos = t > 1e-14
    vals[pos] = -(t[pos] ** (-k)) * node_cloud["u0"][pos] * totals[pos]
    if np.any(~pos):
        vals[~pos] = -Pu_nodes[~pos] / k
    return ChebModel.from_values(vals.reshape(shape), fields.a)


def transport_step(
    chart: NormalChart,
    k: int,
    u_prev: HadamardTable,
    fields: Optional[ChartFields] = None,
) -> HadamardTable:
    """One level of the hierarchy by the integrating-factor radial quadrature."""
    if k < 1:
        raise GridError("transport_step needs k >= 1")
    if u_prev.model is None:
        raise GridError("u_prev carries no collocation model; grid too coarse to differentiate")
    fields = fields or ChartFields(chart)
    model = _next_model(fields, k, u_prev.model)
    pts = _table_points(u_prev.directions, u_prev.radii)
    vals = model(pts).reshape(len(u_prev.directions), len(u_prev.radii))
    return HadamardTable(k, u_prev.directions, u_prev.radii, vals, model)


def hadamard_sequence(
    chart: NormalChart,
    N: int,
    directions: Optional[np.ndarray] = None,
    n_radial: int = QUAD_NODES,
    fields: Optional[ChartFields] = None,
) -> HadamardSequence:
    """Iterate the transport hierarchy up to order N and extract diagonal values.

    Diagonal values use Richardson extrapolation of u_k(t v) over
    t in {r, r/2, r/4} (r = 0.05 x chart radius), averaged over directions.
    """
    if N > 3:
        raise GridError("transport accuracy budget caps N at 3")
    fields = fields or ChartFields(chart)
    n = fields.n
    dirs = default_directions(n) if directions is None else np.asarray(directions, dtype=float)
    radii, _ = _gauss_radii(0.95 * fields.a, n_radial)
    tables = [_u0_table(fields, dirs, radii)]
    for k in range(1, N + 1):
        tables.append(transport_step(chart, k, tables[-1], fields))

    r = 0.05 * chart.radius
    diag = np.empty(N + 1)
    diag[0] = 1.0
    for k in range(1, N + 1):
        vals = [float(np.mean(tables[k].model(t * dirs))) for t in (r, r / 2, r / 4)]
        f_r, f_r2, f_r4 = vals
        diag[k] = (f_r - 6.0 * f_r2 + 8.0 * f_r4) / 3.0
    return HadamardSequence(chart=chart, order=N, tables=tables, diag=diag, fields=fields)


def diag_direction_spread(seq: HadamardSequence, k: int) -> float:
    """Relative spread of the extrapolated diagonal value across ray directions."""
    r = 0.05 * seq.chart.radius
    dirs = seq.tables[k].directions
    per = [seq.tables[k].model(t * dirs) for t in (r, r / 2, r / 4)]
    vals = (per[0] - 6.0 * per[1] + 8.0 * per[2]) / 3.0
    scale = max(1e-12, float(np.max(np.abs(vals))))
    return float((vals.max() - vals.min()) / scale)


def transport_residual(seq: HadamardSequence, k: int) -> np.ndarray:
    """|2k u_k + h u_k + 2 rho u_k + 2 P u_{k-1}| on interior grid nodes."""
    if k < 1 or k > seq.order:
        raise GridError("residual defined for 1 <= k <= order")
    fields = seq.fields
    tab = seq.tables[k]
    dirs, radii = tab.directions, tab.radii
    interior = (radii > 0.1 * radii[-1]) & (radii < 0.9 * radii[-1])
    pts = _table_points(dirs, radii[interior])
    uk = tab.model(pts)
    du = np.stack([tab.model.derivative(i)(pts) for i in range(fields.n)], axis=1)
    rho_u = np.einsum("bi,bi->b", pts, du)
    h = fields.h(pts)
    Pu_prev = fields.apply_P(seq.tables[k - 1].model)(pts)
    return np.abs(2 * k * uk + h * uk + 2 * rho_u + 2 * Pu_prev)
