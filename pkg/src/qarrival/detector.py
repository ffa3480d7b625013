"""Two-state detector driven by the sampled entry probability.

The detector starts in the idle state and rotates toward the triggered
state under the off-diagonal Hamiltonian H = rate(t) * sigma_x, where the
rotation angle is pinned to the entry curve:

    angle(t) = arcsin(sqrt(k * p_entry(t))),   rate = d(angle)/dt,

so the triggered-state population sin^2(angle) equals k * p_entry by
construction.  `evolve_ode` re-integrates the postulated equation of motion
numerically and exists purely as an independent check of the closed form.

The angle is differentiated directly rather than assembled from
d(p_entry)/dt through the chain rule: the chain rule carries a removable
1/sqrt(p_entry) singularity at p_entry = 0, while the angle itself stays
smooth there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probability import EntryProbabilityCurve
from .quadrature import differentiate_sampled


@dataclass(frozen=True)
class DetectorState:
    """Complex amplitudes on the (idle, triggered) basis; unit norm."""

    c0: complex
    c1: complex

    def __post_init__(self):
        norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"detector state is not normalized (norm^2 = {norm!r})")

    @property
    def norm_squared(self) -> float:
        return abs(self.c0) ** 2 + abs(self.c1) ** 2

    @property
    def p_triggered(self) -> float:
        return abs(self.c1) ** 2


IDLE_STATE = DetectorState(1.0 + 0.0j, 0.0 + 0.0j)


@dataclass(frozen=True, eq=False)
class CouplingSchedule:
    """Sampled coupling derived from an entry curve.

    angle(t_i) = arcsin(sqrt(k * p_entry(t_i))) is nondecreasing, starts at
    0, and stays within [0, arcsin(sqrt(k))]; `rate` is its sampled
    derivative and `entry_rate` the derivative of the entry probability
    itself (emitted for inspection only).
    """

    k: float
    t: np.ndarray
    angle: np.ndarray
    rate: np.ndarray
    entry_rate: np.ndarray
    curve: EntryProbabilityCurve

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def angle_max(self) -> float:
        return float(np.arcsin(np.sqrt(self.k)))

    def angle_at(self, t: float) -> float:
        t = float(t)
        span = self.t[-1] - self.t[0]
        if t < self.t[0] - 1e-12 * span or t > self.t[-1] + 1e-12 * span:
            raise ValueError(f"time {t} lies outside the schedule grid "
                             f"[{self.t[0]}, {self.t[-1]}]")
        return float(np.interp(t, self.t, self.angle))

    def metadata(self) -> dict:
        return {"k": self.k, "angle_max": float(self.angle[-1]),
                "p_registered_final": float(np.sin(self.angle[-1]) ** 2)}

    def write_csv(self, path):
        write_schedule_csv(self, path)


def coupling_schedule(curve: EntryProbabilityCurve, k: float) -> CouplingSchedule:
    """Build the coupling schedule pinned to k * p_entry on the curve grid."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise ValueError(f"coupling fraction k must lie in (0, 1), got {k}")
    if curve.t.size < 3:
        raise ValueError("coupling schedule needs a curve of at least 3 samples")
    angle = np.arcsin(np.sqrt(np.clip(k * curve.p_entry, 0.0, 1.0)))
    dt = curve.dt
    rate = differentiate_sampled(angle, dt)
    entry_rate = differentiate_sampled(curve.p_entry, dt)
    return CouplingSchedule(k=k, t=curve.t.copy(), angle=angle, rate=rate,
                            entry_rate=entry_rate, curve=curve)


def evolve_closed_form(sched: CouplingSchedule, t: float) -> DetectorState:
    """chi(t) = idle * cos(angle) - i * triggered * sin(angle)."""
    angle = sched.angle_at(t)
    return DetectorState(complex(np.cos(angle)), -1j * np.sin(angle))


def registration_probability(sched: CouplingSchedule, t: float) -> float:
    """Probability of finding the detector triggered: sin^2(angle(t))."""
    return float(np.sin(sched.angle_at(t)) ** 2)


def _rk4_step(c0: complex, c1: complex, a0: float, a_mid: float, a1: float,
              h: float) -> tuple[complex, complex]:
    # plain complex scalars: array overhead dominates at this size
    k1_0 = -1j * a0 * c1
    k1_1 = -1j * a0 * c0
    y0 = c0 + 0.5 * h * k1_0
    y1 = c1 + 0.5 * h * k1_1
    k2_0 = -1j * a_mid * y1
    k2_1 = -1j * a_mid * y0
    y0 = c0 + 0.5 * h * k2_0
    y1 = c1 + 0.5 * h * k2_1
    k3_0 = -1j * a_mid * y1
    k3_1 = -1j * a_mid * y0
    y0 = c0 + h * k3_0
    y1 = c1 + h * k3_1
    k4_0 = -1j * a1 * y1
    k4_1 = -1j * a1 * y0
    return (c0 + (h / 6.0) * (k1_0 + 2.0 * (k2_0 + k3_0) + k4_0),
            c1 + (h / 6.0) * (k1_1 + 2.0 * (k2_1 + k3_1) + k4_1))


def _integrate_interval(c0: complex, c1: complex, a_lo: float, slope: float,
                        h: float, local_tol: float) -> tuple[complex, complex]:
    """One grid interval with the rate linear in time, substepped until the
    step-doubling residual meets the local tolerance."""
    substeps = 1
    prev = None
    for _ in range(8):
        u0, u1 = c0, c1
        hs = h / substeps
        for j in range(substeps):
            ta = j * hs
            u0, u1 = _rk4_step(u0, u1, a_lo + slope * ta,
                               a_lo + slope * (ta + 0.5 * hs),
                               a_lo + slope * (ta + hs), hs)
        if prev is not None and abs(u0 - prev[0]) + abs(u1 - prev[1]) <= local_tol:
            return u0, u1
        prev = (u0, u1)
        substeps *= 2
    raise RuntimeError("detector propagation step size underflow")


def evolve_ode_trajectory(sched: CouplingSchedule,
                          local_tol: float = 1e-9) -> np.ndarray:
    """States at every schedule node from numerically integrating
    i d(chi)/dt = rate(t) sigma_x chi with the rate interpolated linearly."""
    t = sched.t
    rate = sched.rate.tolist()
    steps = np.diff(t).tolist()
    out = np.empty((t.size, 2), dtype=complex)
    c0, c1 = 1.0 + 0.0j, 0.0 + 0.0j
    out[0] = (c0, c1)
    for i, h in enumerate(steps):
        slope = (rate[i + 1] - rate[i]) / h
        c0, c1 = _integrate_interval(c0, c1, rate[i], slope, h, local_tol)
        out[i + 1] = (c0, c1)
    return out


def evolve_ode(sched: CouplingSchedule, t: float,
               local_tol: float = 1e-9) -> DetectorState:
    """Numerical integration of the detector equation of motion up to t."""
    t = float(t)
    span = sched.t[-1] - sched.t[0]
    if t < sched.t[0] - 1e-12 * span or t > sched.t[-1] + 1e-12 * span:
        raise ValueError(f"time {t} lies outside the schedule grid "
                         f"[{sched.t[0]}, {sched.t[-1]}]")
    c0, c1 = 1.0 + 0.0j, 0.0 + 0.0j
    grid, rate = sched.t, sched.rate
    for i in range(grid.size - 1):
        if grid[i] >= t:
            break
        hi = min(grid[i + 1], t)
        h = hi - grid[i]
        if h <= 0.0:
            break
        slope = (rate[i + 1] - rate[i]) / (grid[i + 1] - grid[i])
        c0, c1 = _integrate_interval(c0, c1, rate[i], slope, h, local_tol)
    return DetectorState(c0, c1)


def ode_consistency(sched: CouplingSchedule,
                    local_tol: float = 1e-9) -> dict:
    """Close the loop: re-integrate the equation of motion and compare the
    triggered population against k * p_entry on the whole grid."""
    states = evolve_ode_trajectory(sched, local_tol)
    populations = np.abs(states[:, 1]) ** 2
    norms = np.abs(states[:, 0]) ** 2 + populations
    residual = float(np.max(np.abs(populations - sched.k * sched.curve.p_entry)))
    unitarity = float(np.max(np.abs(norms - 1.0)))
    return {"consistency_residual_max": residual,
            "unitarity_residual_max": unitarity}


def write_schedule_csv(sched: CouplingSchedule, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,rate,angle,p_registered,entry_rate\n")
        p_reg = np.sin(sched.angle) ** 2
        for row in zip(sched.t, sched.rate, sched.angle, p_reg, sched.entry_rate):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
