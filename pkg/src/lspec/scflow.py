"""Rescaled Hamilton flow on the radially compactified phase space and the
empirical non-trapping certificate for the Minkowski scattering model.

The flow of p(x, xi) = -xi . g^{-1}(x) xi is integrated in interior
coordinates, reparametrized by <xi>^{-1} rho^{-1} (rho = <x>^{-1}), with the
fiber renormalized to unit length each step; this realizes the bicharacteristic
flow on the cosphere bundle, so (x, xi) and (x, 2 xi) trace the same curve.

Radial sets for the Minkowski model, in interior asymptotics: along a null
line the base direction x/|x| tends to a null direction yhat and the fiber
direction to -+ eta yhat (normalized); the sink L_+ is the forward endpoint
(fiber parallel to -eta yhat), the source L_- the backward one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CharacteristicError, EscapeError, StepError
from .geomkit import MetricField

__all__ = [
    "ScPhasePoint",
    "FlowResult",
    "hamilton_step",
    "nontrapping_certificate",
    "characteristic_covector",
    "CAPTURE_RADIUS",
    "FLOW_BUDGET",
]

CAPTURE_RADIUS = 1e-3
FLOW_BUDGET = 1e4
CHAR_TOL = 1e-8


@dataclass(frozen=True)
class ScPhasePoint:
    """Interior phase-space point with compactified bookkeeping."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        xi = np.asarray(self.xi, dtype=float)
        nrm = np.linalg.norm(xi)
        if nrm == 0:
            raise CharacteristicError("zero covector")
        object.__setattr__(self, "xi", xi / nrm)

    @property
    def rho(self) -> float:
        """Boundary-defining function <x>^{-1} of base infinity."""
        return 1.0 / np.sqrt(1.0 + float(self.x @ self.x))

    @property
    def fiber_scale(self) -> float:
        return 1.0 / np.sqrt(1.0 + float(self.xi @ self.xi))


@dataclass
class FlowResult:
    points: np.ndarray  # sampled (x, xi) trajectory, shape (S, 2n)
    times: np.ndarray
    classification: str  # reached_L_plus | reached_L_minus | escaped | budget_exhausted
    closest_plus: float
    closest_minus: float
    char_drift: float


def _symbol(metric: MetricField, x, xi) -> float:
    ginv = np.linalg.inv(metric.eval(x))
    return float(-xi @ ginv @ xi)


def characteristic_covector(metric: MetricField, x, spatial_dir, sign: float = 1.0) -> np.ndarray:
    """Null covector (xi_0, s * omega) with p(x, xi) = 0, |omega| = 1."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(spatial_dir, dtype=float)
    omega = omega / np.linalg.norm(omega)
    ginv = np.linalg.inv(metric.eval(x))
    a = ginv[0, 0]
    b = 2.0 * ginv[0, 1:] @ omega
    c = omega @ ginv[1:, 1:] @ omega
    disc = b * b - 4 * a * c
    if disc < 0:
        raise CharacteristicError("no real null covector in this direction")
    xi0 = (-b + sign * np.sqrt(disc)) / (2 * a)
    xi = np.concatenate([[xi0], omega])
    return xi / np.linalg.norm(xi)


def _radial_distances(x, xi):
    """Distances to the Minkowski radial sets L_+/L_- in interior asymptotics.

    d_+- = sqrt(rho^2 + v^2 + varrho^2 + |xihat +- eta xhat|^2) with
    v = eta(xhat, xhat) the nullness of the base direction and varrho the
    (Euclidean) radial fiber component; at L_+ the fiber is -eta xhat.
    """
    r = np.linalg.norm(x)
    if r == 0:
        return np.inf, np.inf
    xhat = x / r
    rho = 1.0 / np.sqrt(1.0 + r * r)
    eta_xhat = np.concatenate([[xhat[0]], -xhat[1:]])
    v = xhat[0] ** 2 - float(xhat[1:] @ xhat[1:])
    xihat = xi / np.linalg.norm(xi)
    varrho = float(xihat @ xhat)
    d_plus = np.sqrt(rho ** 2 + v ** 2 + varrho ** 2 + float(np.sum((xihat + eta_xhat) ** 2)))
    d_minus = np.sqrt(rho ** 2 + v ** 2 + varrho ** 2 + float(np.sum((xihat - eta_xhat) ** 2)))
    return d_plus, d_minus


def hamilton_step(
    metric: MetricField,
    p: ScPhasePoint,
    direction: int = 1,
    budget: float = FLOW_BUDGET,
    samples: int = 400,
    capture_radius: float = CAPTURE_RADIUS,
) -> FlowResult:
    """Flow one characteristic point until capture at L_+-, escape, or budget.

    Integrates the interior Hamilton field of p = -xi.g^{-1}(x) xi
    reparametrized by <xi>^{-1} rho^{-1}, renormalizing the fiber each step.
    """
    n = metric.dim
    x0, xi0 = p.x.copy(), p.xi.copy()
    if abs(_symbol(metric, x0, xi0)) > CHAR_TOL:
        raise CharacteristicError(
            f"point is not characteristic: |p| = {abs(_symbol(metric, x0, xi0)):.2e}"
        )

    def rhs(t, y):
        x, xi = y[:n], y[n:]
        nxi = np.linalg.norm(xi)
        xin = xi / nxi
        g, dg = metric.derivatives1(x[None, :])
        ginv = np.linalg.inv(g[0])
        dginv = -np.einsum("ia,mab,bl->mil", ginv, dg[0], ginv)
        speed = np.sqrt(1.0 + float(x @ x))  # rho^{-1}; |xi| normalized to 1
        dx = speed * (-2.0 * ginv @ xin)
        dxi_full = speed * np.einsum("mil,i,l->m", dginv, xin, xin)
        dxi = dxi_full - (dxi_full @ xin) * xin  # keep |xi| = 1
        return np.concatenate([dx, dxi])

    best = {"plus": np.inf, "minus": np.inf}

    def capture_plus(t, y):
        dp, _ = _radial_distances(y[:n], y[n:])
        best["plus"] = min(best["plus"], dp)
        return dp - capture_radius

    def capture_minus(t, y):
        _, dm = _radial_distances(y[:n], y[n:])
        best["minus"] = min(best["minus"], dm)
        return dm - capture_radius

    def escape(t, y):
        return metric.patch.margin_of(y[:n])

    capture_plus.terminal = True
    capture_plus.direction = -1
    capture_minus.terminal = True
    capture_minus.direction = -1
    escape.terminal = True
    escape.direction = -1

    events = [capture_plus, capture_minus, escape]
    sol = solve_ivp(
        rhs,
        (0.0, direction * budget),
        np.concatenate([x0, xi0]),
        method="RK45",
        rtol=1e-8,
        atol=1e-10,
        events=events,
        dense_output=True,
    )
    if sol.status == -1:
        raise StepError(f"flow integrator failed: {sol.message}")
    ts = np.linspace(sol.t[0], sol.t[-1], samples)
    pts = sol.sol(ts).T
    # renormalize fibers in the samples and measure characteristic drift
    drift = 0.0
    for row in pts[:: max(1, samples // 16)]:
        row[n:] /= np.linalg.norm(row[n:])
        drift = max(drift, abs(_symbol(metric, row[:n], row[n:])))
    if sol.status == 1:
        if len(sol.t_events[0]) > 0:
            cls = "reached_L_plus"
        elif len(sol.t_events[1]) > 0:
            cls = "reached_L_minus"
        else:
            cls = "escaped"
    else:
        cls = "budget_exhausted"
    # capture requires the approach to be decreasing over the last quarter
    if cls in ("reached_L_plus", "reached_L_minus"):
        which = 0 if cls == "reached_L_plus" else 1
        tail = pts[3 * samples // 4 :]
        ds = [_radial_distances(row[:n], row[n:])[which] for row in tail]
        if not ds[-1] <= ds[0] + 1e-12:
            cls = "budget_exhausted"
    return FlowResult(
        points=pts,
        times=ts,
        classification=cls,
        closest_plus=float(min(best["plus"], np.inf)),
        closest_minus=float(min(best["minus"], np.inf)),
        char_drift=float(drift),
    )


@dataclass
class CertificateReport:
    samples: int
    classified: int
    transitions: List[str] = field(default_factory=list)
    worst_closest: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.samples == 0 or (self.classified == self.samples and not self.failures)


def nontrapping_certificate(
    metric: MetricField,
    sample_count: int,
    seed: int = 0,
    budget: float = FLOW_BUDGET,
    box_half_width: float = 3.0,
) -> CertificateReport:
    """Sample characteristic points, flow both ways, and certify that every
    bicharacteristic runs from one radial set to the other."""
    from dataclasses import replace

    from .geomkit import Box

    n = metric.dim
    # the scattering model lives on all of R^n; lift the patch for the flow
    metric = replace(
        metric, patch=Box(lo=np.full(n, -np.inf), hi=np.full(n, np.inf))
    )
    rng = np.random.default_rng(seed)
    report = CertificateReport(samples=sample_count, classified=0)
    worst = 0.0
    for _ in range(sample_count):
        x = rng.uniform(-box_half_width, box_half_width, size=n)
        omega = rng.normal(size=n - 1)
        omega /= np.linalg.norm(omega)
        xi = characteristic_covector(metric, x, omega, sign=rng.choice([-1.0, 1.0]))
        pt = ScPhasePoint(x=x, xi=xi)
        try:
            fwd = hamilton_step(metric, pt, +1, budget=budget)
            bwd = hamilton_step(metric, pt, -1, budget=budget)
        except (StepError, EscapeError) as exc:
            report.failures.append(str(exc))
            continue
        ok_pair = {fwd.classification, bwd.classification} == {
            "reached_L_plus",
            "reached_L_minus",
        }
        if ok_pair:
            report.classified += 1
            report.transitions.append(f"{bwd.classification}->{fwd.classification}")
            worst = max(
                worst,
                fwd.closest_plus if fwd.classification == "reached_L_plus" else fwd.closest_minus,
                bwd.closest_plus if bwd.classification == "reached_L_plus" else bwd.closest_minus,
            )
        else:
            report.failures.append(f"{bwd.classification}->{fwd.classification}")
    report.worst_closest = float(worst)
    return report
