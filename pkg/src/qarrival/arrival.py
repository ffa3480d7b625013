"""Arrival-time density and mean for a point detector.

The density is |psi_nD(x_D, t)|^2 normalized to unit mass over
[t0, infinity); the mean arrival time is its first moment.  Moments are
computed on the same node set as the normalizer so the quadrature bias
cancels in the ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError
from .geometry import EmissionEvent, _as_vec3
from .quadrature import QuadratureSpec, SemiInfiniteResult, semiinfinite_profile
from .probability import resolve_time_controls, _profile_key, _stop_floor
from .wavepacket import MomentumAmplitude, PointDensityCurve


@dataclass(frozen=True, eq=False)
class ArrivalTimeStats:
    """Normalized arrival-time density on a uniform grid with its moments.

    `mean_time` and `spread` are elapsed quantities (measured from the
    emission time); `classical_time` is mass * distance / p0 when the
    amplitude exposes a central momentum, else None.
    """

    mean_time: float
    t: np.ndarray
    density: np.ndarray
    normalizer: SemiInfiniteResult
    classical_time: float | None = None
    spread: float | None = None

    def metadata(self) -> dict:
        return {"mean_arrival": self.mean_time,
                "classical_flight": self.classical_time,
                "spread": self.spread,
                "normalizer": self.normalizer.as_dict()}

    def write_csv(self, path):
        write_arrival_csv(self, path)


def write_arrival_csv(stats: ArrivalTimeStats, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,density\n")
        for t, d in zip(stats.t, stats.density):
            fh.write(f"{t:.17g},{d:.17g}\n")


def stats_from_samples(taus, values, t0: float = 0.0,
                       classical_time: float | None = None,
                       normalizer: SemiInfiniteResult | None = None) -> ArrivalTimeStats:
    """Normalize sampled density values on their own grid and take moments.

    This is the single moment path; tests may inject synthetic samples here.
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values < 0.0):
        raise ValueError("density samples must be nonnegative")
    mass = float(np.trapezoid(values, taus))
    if not mass > 0.0:
        raise IntegrationError("arrival density has zero mass", estimate=0.0)
    density = values / mass
    mean = float(np.trapezoid(taus * density, taus))
    var = float(np.trapezoid((taus - mean) ** 2 * density, taus))
    if normalizer is None:
        normalizer = SemiInfiniteResult(value=mass, error_estimate=0.0,
                                        t_max=t0 + float(taus[-1]), converged=True)
    return ArrivalTimeStats(mean_time=mean, t=t0 + taus, density=density,
                            normalizer=normalizer, classical_time=classical_time,
                            spread=float(np.sqrt(max(var, 0.0))))


_SAMPLE_CACHE: dict = {}
_SAMPLE_CACHE_MAX = 8


def _uniform_point_samples(amp: MomentumAmplitude, x_detector,
                           source: EmissionEvent, quad: QuadratureSpec | None):
    x_detector = _as_vec3(x_detector, "x_detector")
    distance = float(np.linalg.norm(x_detector - source.x0))
    quad = resolve_time_controls(amp, source, max(distance, 1e-300), 0.0,
                                 quad or QuadratureSpec())
    key = _profile_key(amp, x_detector, source, quad)
    hit = _SAMPLE_CACHE.get(key)
    if hit is not None:
        return hit
    evaluator = PointDensityCurve(amp, x_detector, source, quad)
    t_min = _stop_floor(amp, source, evaluator.distance, quad.t_cap)
    _, _, _, tail = semiinfinite_profile(evaluator, quad, step_growth=True,
                                         t_min_stop=t_min)
    if not tail.converged:
        raise IntegrationError(
            "arrival normalizer did not reach its tail criterion before the "
            f"time cap {source.t0 + tail.t_max:.6g}",
            estimate=tail.error_estimate, value=tail.value)
    n = int(round(tail.t_max / quad.dt))
    taus = quad.dt * np.arange(n + 1)
    values = evaluator(taus)
    mass = float(np.trapezoid(values, taus))
    if not mass > 0.0:
        raise IntegrationError("arrival density vanishes along the line of sight",
                               estimate=tail.error_estimate)
    normalizer = SemiInfiniteResult(
        value=mass,
        error_estimate=max(tail.error_estimate, abs(tail.value - mass)),
        t_max=source.t0 + tail.t_max, converged=True)
    out = (taus, values, normalizer, evaluator.distance)
    if len(_SAMPLE_CACHE) >= _SAMPLE_CACHE_MAX:
        _SAMPLE_CACHE.pop(next(iter(_SAMPLE_CACHE)))
    _SAMPLE_CACHE[key] = out
    return out


def arrival_density(amp: MomentumAmplitude, x_detector, source: EmissionEvent,
                    quad: QuadratureSpec | None = None):
    """Sampled unit-mass arrival density: (absolute times, density values)."""
    taus, values, normalizer, _ = _uniform_point_samples(amp, x_detector,
                                                         source, quad)
    return source.t0 + taus, values / normalizer.value


def mean_arrival_time(amp: MomentumAmplitude, x_detector, source: EmissionEvent,
                      quad: QuadratureSpec | None = None) -> ArrivalTimeStats:
    """Mean elapsed arrival time with the full sampled density attached."""
    taus, values, normalizer, distance = _uniform_point_samples(
        amp, x_detector, source, quad)
    classical = None
    if amp.exposed_p0 is not None:
        classical = source.mass * distance / amp.exposed_p0
    return stats_from_samples(taus, values, t0=source.t0,
                              classical_time=classical, normalizer=normalizer)
