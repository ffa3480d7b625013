"""Shared numerical integration engine.

Provides Gauss-Legendre panel rules for radial integrals, product grids over
direction caps and detector volumes, a tail-controlled semi-infinite time
integrator, and second-order finite differences on uniform grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import DetectorGeometry, orthonormal_frame

#: window sizing of the semi-infinite integrator: the first window holds
#: WINDOW_NODES samples of step dt; with step growth enabled, later
#: (doubled) windows keep step dt until they would exceed WINDOW_NODES_MAX
#: samples, after which the step grows with the window.
WINDOW_NODES = 1024
WINDOW_NODES_MAX = 8192


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization controls shared by every integral in the pipeline.

    `dt` and `t_cap` may be left as None at the library boundary; the
    probability/arrival pipelines derive them from the scenario scales
    (classical flight time and packet width).  Direct calls to
    `integrate_time_semiinfinite` require both to be set.
    """

    radial_nodes: int = 32       # Gauss-Legendre nodes per radial panel
    radial_panels: int = 1       # minimum panel count; grows with oscillation
    polar_nodes: int = 8
    azimuth_nodes: int = 8
    dt: float | None = None      # time step of the sampled grids
    eps_tail: float = 1e-6       # relative tail threshold for window doubling
    t_cap: float | None = None   # hard stop for window doubling
    rtol: float = 1e-6           # target relative tolerance of error estimates
    p_max: float | None = None   # optional hard truncation of the momentum range

    def __post_init__(self):
        if self.radial_nodes < 4:
            raise ValueError(f"radial_nodes must be >= 4, got {self.radial_nodes}")
        if self.radial_panels < 1:
            raise ValueError(f"radial_panels must be >= 1, got {self.radial_panels}")
        if self.polar_nodes < 1 or self.azimuth_nodes < 1:
            raise ValueError("polar_nodes and azimuth_nodes must be >= 1")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0.0 < self.eps_tail < 1.0:
            raise ValueError(f"eps_tail must be in (0, 1), got {self.eps_tail}")
        if self.t_cap is not None and not self.t_cap > 0.0:
            raise ValueError(f"t_cap must be positive, got {self.t_cap}")
        if not self.rtol > 0.0:
            raise ValueError(f"rtol must be positive, got {self.rtol}")


@dataclass(frozen=True)
class SemiInfiniteResult:
    """Outcome of a tail-controlled integral over [t0, infinity).

    `error_estimate` is the last window's contribution (the tail surrogate);
    when `converged` it is bounded by eps_tail * value by construction.
    `t_max` is the effective upper limit actually integrated to.
    """

    value: float
    error_estimate: float
    t_max: float
    converged: bool

    def as_dict(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate,
                "t_max": self.t_max, "converged": self.converged}


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_panels(a: float, b: float, panels: int,
                          nodes_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule: `panels` equal panels on [a, b]."""
    if not b > a:
        raise ValueError(f"empty integration range [{a}, {b}]")
    x, w = _leggauss(nodes_per_panel)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def cap_directions(axis: np.ndarray, cos_half: float, n_polar: int,
                   n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule over the direction cap {n : n.axis >= cos_half}.

    Gauss-Legendre in cos(theta), uniform (trapezoid-on-periodic) in azimuth.
    Weights sum to the cap solid angle exactly.
    """
    u, wu = gauss_legendre_panels(cos_half, 1.0, 1, n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    wphi = 2.0 * np.pi / n_azimuth
    e1, e2 = orthonormal_frame(axis)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    ring = np.cos(phi)[None, :, None] * e1 + np.sin(phi)[None, :, None] * e2
    dirs = sin_t[:, None, None] * ring + u[:, None, None] * axis
    weights = np.repeat(wu * wphi, n_azimuth)
    return dirs.reshape(-1, 3), weights


def volume_grid(det: DetectorGeometry,
                spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Product grid over the detector volume in detector-local spherical
    coordinates.  Weights include the r^2 Jacobian and sum exactly to V_D."""
    n_r = max(4, spec.polar_nodes)
    if det.kind == "sphere":
        r, wr = gauss_legendre_panels(0.0, det.radius, 1, n_r)
        u, wu = gauss_legendre_panels(-1.0, 1.0, 1, spec.polar_nodes)
        origin = det.center
    elif det.kind == "cap":
        r, wr = gauss_legendre_panels(det.r_inner, det.r_outer, 1, n_r)
        u, wu = gauss_legendre_panels(np.cos(det.half_angle), 1.0, 1, spec.polar_nodes)
        origin = det.apex
    else:
        raise ValueError(f"unsupported detector kind {det.kind!r}")
    phi = 2.0 * np.pi * np.arange(spec.azimuth_nodes) / spec.azimuth_nodes
    wphi = 2.0 * np.pi / spec.azimuth_nodes
    e1, e2 = orthonormal_frame(det.axis)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    ring = np.cos(phi)[None, :, None] * e1 + np.sin(phi)[None, :, None] * e2
    dirs = (sin_t[:, None, None] * ring + u[:, None, None] * det.axis).reshape(-1, 3)
    ang_w = np.repeat(wu * wphi, spec.azimuth_nodes)
    points = origin[None, None, :] + r[:, None, None] * dirs[None, :, :]
    weights = (wr * r * r)[:, None] * ang_w[None, :]
    return points.reshape(-1, 3), weights.ravel()


def integrate_volume(g, det: DetectorGeometry, spec: QuadratureSpec) -> float:
    """Integral of g(x) over the detector volume.

    `g` must accept an (N, 3) array of points and return N values.
    """
    points, weights = volume_grid(det, spec)
    values = np.asarray(g(points), dtype=float)
    return float(weights @ values)


def differentiate_sampled(values, dt: float) -> np.ndarray:
    """Second-order derivative of uniformly sampled values.

    Central differences in the interior, one-sided second-order stencils at
    the two ends; exact for quadratics.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("differentiate_sampled needs a 1-d series of at least 3 samples")
    dt = float(dt)
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt)
    out[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * dt)
    return out


def semiinfinite_profile(f, spec: QuadratureSpec, *, step_growth: bool = True,
                         t_min_stop: float = 0.0):
    """Integrate f(tau) >= 0 over [0, infinity) by window doubling.

    The window [0, T] is extended in doublings until the last window
    contributes less than eps_tail of the accumulated value for two
    consecutive doublings (counted only past `t_min_stop`), or t_cap is hit
    (converged=False then).  Within each window the rule is the composite
    trapezoid at step `dt`; with `step_growth` the step is allowed to grow in
    later windows so each window holds at most ~WINDOW_NODES samples.

    Returns (tau_grid, f_values, cumulative, SemiInfiniteResult); the
    cumulative array holds the running integral at the grid nodes.
    """
    if spec.dt is None or spec.t_cap is None:
        raise ValueError("semi-infinite integration requires dt and t_cap to be set")
    dt, cap = spec.dt, spec.t_cap
    w0 = min(cap, WINDOW_NODES * dt)

    taus = [np.array([0.0])]
    values = [np.asarray(f(np.array([0.0])), dtype=float)]
    increments = [np.zeros(1)]
    total = 0.0
    last_value = float(values[0][0])
    t_lo, t_hi = 0.0, w0
    small_streak = 0
    contribution = np.inf
    converged = False

    while True:
        length = t_hi - t_lo
        if step_growth:
            n = min(int(round(length / dt)), WINDOW_NODES_MAX)
        else:
            n = int(round(length / dt))
        n = max(n, 1)
        h = length / n
        grid = t_lo + h * np.arange(1, n + 1)
        grid[-1] = t_hi
        vals = np.asarray(f(grid), dtype=float)
        left = np.concatenate(([last_value], vals[:-1]))
        incr = 0.5 * h * (left + vals)
        contribution = float(incr.sum())
        total += contribution
        taus.append(grid)
        values.append(vals)
        increments.append(incr)
        last_value = float(vals[-1])

        if t_hi >= t_min_stop and contribution <= spec.eps_tail * total:
            small_streak += 1
        else:
            small_streak = 0
        if small_streak >= 2:
            converged = True
            break
        if t_hi >= cap:
            break
        t_lo, t_hi = t_hi, min(cap, 2.0 * t_hi)

    tau_grid = np.concatenate(taus)
    f_values = np.concatenate(values)
    cumulative = np.cumsum(np.concatenate(increments))
    # report the cumulative's own endpoint so downstream ratios reach 1 exactly
    result = SemiInfiniteResult(value=float(cumulative[-1]),
                                error_estimate=abs(contribution),
                                t_max=float(tau_grid[-1]), converged=converged)
    return tau_grid, f_values, cumulative, result


def integrate_time_semiinfinite(f, t0: float, spec: QuadratureSpec, *,
                                step_growth: bool = True,
                                t_min_stop: float = 0.0) -> SemiInfiniteResult:
    """Tail-controlled integral of a nonnegative, eventually decaying f over
    [t0, infinity).  `f` must accept an array of absolute times."""
    _, _, _, result = semiinfinite_profile(
        lambda tau: f(t0 + tau), spec, step_growth=step_growth,
        t_min_stop=t_min_stop)
    return SemiInfiniteResult(value=result.value,
                              error_estimate=result.error_estimate,
                              t_max=t0 + result.t_max, converged=result.converged)
