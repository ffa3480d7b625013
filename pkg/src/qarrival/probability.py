"""Detector-entry probability pipeline.

Factorizes the probability that the particle entered the detector during
[t0, t] into the direction factor (momentum points through the detector)
times the conditional occupation ratio

    truncated / full time integral of  Integral_V |psi_D(x, t')|^2 d^3x,

and exposes both as sampled curves over a uniform time grid.  A point
detector replaces the volume integral by the single-point density
|psi_nD(x_D, t')|^2 and carries the direction factor separately (default 1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GeometryError, IntegrationError
from .geometry import EmissionEvent, DetectorGeometry, cap_detector
from .quadrature import QuadratureSpec, SemiInfiniteResult, cap_directions, \
    semiinfinite_profile
from .wavepacket import MomentumAmplitude, PointDensityCurve, \
    VolumeOccupationCurve, characteristic_momentum, characteristic_spread, \
    momentum_norm_squared, normalize, radial_density_integral

_NORM_TOL = 1e-6


@dataclass(frozen=True)
class TimeGridSpec:
    """Output grid for sampled curves: step and absolute end time.

    Unset fields fall back to the quadrature step and the effective upper
    integration limit found by the tail control.
    """

    dt: float | None = None
    t_end: float | None = None

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"grid dt must be positive, got {self.dt}")


@dataclass(frozen=True, eq=False)
class EntryProbabilityCurve:
    """Sampled entry probabilities on a uniform time grid from t0.

    p_entry = p_direction * p_conditional holds pointwise by construction;
    p_entry is nondecreasing, starts at 0, and stays within [0, 1].
    """

    t: np.ndarray
    p_direction: float
    p_conditional: np.ndarray
    p_entry: np.ndarray
    denominator: SemiInfiniteResult
    point_detector: bool
    quad_error: float = 0.0
    omega: float | None = None

    def __post_init__(self):
        if np.any(self.p_conditional < -1e-12) or np.any(self.p_conditional > 1.0 + 1e-12):
            raise ValueError("conditional probabilities leave [0, 1]")
        if np.any(np.diff(self.p_entry) < -1e-10):
            raise ValueError("entry probability is not nondecreasing")
        if abs(self.p_entry[0]) > 1e-300:
            raise ValueError("entry probability must start at 0")
        residual = np.max(np.abs(self.p_entry - self.p_direction * self.p_conditional))
        if residual > 1e-12:
            raise ValueError(f"entry probability fails to factorize (residual {residual})")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def metadata(self) -> dict:
        return {
            "p_direction": self.p_direction,
            "omega": self.omega,
            "t_max": self.denominator.t_max,
            "point_detector": self.point_detector,
            "denominator": self.denominator.as_dict(),
            "quad_error": self.quad_error,
        }

    def write_csv(self, path):
        write_entry_curve_csv(self, path)


def write_entry_curve_csv(curve: EntryProbabilityCurve, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,p_conditional,p_entry\n")
        for t, pc, pe in zip(curve.t, curve.p_conditional, curve.p_entry):
            fh.write(f"{t:.17g},{pc:.17g},{pe:.17g}\n")


def resolve_time_controls(amp: MomentumAmplitude, source: EmissionEvent,
                          distance: float, extent: float,
                          quad: QuadratureSpec,
                          direction_bound: float = 1.0) -> QuadratureSpec:
    """Fill dt and t_cap from the packet and geometry scales when unset.

    The step resolves the arrival feature, whose width combines the
    momentum-spread travel-time dispersion with the transit time of the
    packet's initial extent and the detector depth.  `direction_bound`
    bounds the entry probability the curve can reach: large coupling angles
    arcsin(sqrt(k p_entry)) need a finer step for the downstream dynamics
    closure, which scales as (dt/width)^2 * angle.  The cap defaults to 50
    classical flight times.
    """
    if quad.dt is not None and quad.t_cap is not None:
        return quad
    p_char = characteristic_momentum(amp)
    sigma_char = characteristic_spread(amp)
    mass = source.mass
    flight = mass * distance / p_char
    width = (mass * distance * sigma_char / p_char ** 2
             + (extent + 0.5 / sigma_char) * mass / p_char)
    dt = quad.dt
    if dt is None:
        # the closure residual scales like sin(2B) dB; its sensitivity peaks
        # at B = pi/4, so refining past that angle buys nothing
        angle_cap = float(np.arcsin(np.sqrt(np.clip(direction_bound, 0.0, 1.0))))
        refine = max(1.0, min(angle_cap, np.pi / 4.0) / 0.125)
        dt = float(np.clip(width / (64.0 * refine), flight / 40000.0, flight / 8.0))
    t_cap = quad.t_cap
    if t_cap is None:
        t_cap = 50.0 * flight
    return replace(quad, dt=dt, t_cap=float(max(t_cap, 4.0 * dt)))


def _require_normalized(amp: MomentumAmplitude):
    n2 = momentum_norm_squared(amp)
    if abs(n2 - 1.0) > _NORM_TOL:
        raise ValueError(
            f"amplitude must be normalized (momentum-space norm^2 = {n2:.6g})")


def _stop_floor(amp: MomentumAmplitude, source: EmissionEvent, reach: float,
                t_cap: float) -> float:
    """Earliest elapsed time at which the tail criterion may fire: past the
    arrival of the slowest momentum component that carries any weight."""
    lo, _ = amp.p_support
    p_floor = max(lo, characteristic_momentum(amp) / 50.0)
    return min(source.mass * reach / p_floor, 0.5 * t_cap)


@dataclass
class OccupationProfile:
    """Internal: sampled occupation integrand with its running integral."""

    t0: float
    tau: np.ndarray
    values: np.ndarray
    cumulative: np.ndarray
    result: SemiInfiniteResult
    quad_error: float


_PROFILE_CACHE: dict = {}
_PROFILE_CACHE_MAX = 16


def _amp_signature(amp: MomentumAmplitude) -> tuple:
    return (amp.kind, amp.p0, amp.sigma_p, amp.angular_sigma, amp.scale,
            None if amp.axis is None else amp.axis.tobytes(),
            None if amp.p_grid is None else amp.p_grid.tobytes(),
            None if amp.radial_values is None else amp.radial_values.tobytes(),
            None if amp.cos_grid is None else amp.cos_grid.tobytes(),
            None if amp.angular_values is None else amp.angular_values.tobytes())


def _profile_key(amp, target, source, quad) -> tuple:
    if isinstance(target, DetectorGeometry):
        tsig = (target.kind, target.center.tobytes(), target.radius,
                target.half_angle, target.r_inner, target.r_outer,
                target.axis.tobytes())
    else:
        tsig = ("point", np.asarray(target, dtype=float).tobytes())
    return (_amp_signature(amp), tsig,
            (source.x0.tobytes(), source.t0, source.mass), quad)


def _occupation_profile(amp: MomentumAmplitude, target, source: EmissionEvent,
                        quad: QuadratureSpec) -> OccupationProfile:
    key = _profile_key(amp, target, source, quad)
    hit = _PROFILE_CACHE.get(key)
    if hit is not None:
        return hit
    if isinstance(target, DetectorGeometry):
        evaluator = VolumeOccupationCurve(amp, target, source, quad)
        reach = target.distance + 0.5 * target.extent_along_axis
    else:
        evaluator = PointDensityCurve(amp, target, source, quad)
        reach = evaluator.distance
    t_min = _stop_floor(amp, source, reach, quad.t_cap)
    tau, vals, cum, res = semiinfinite_profile(evaluator, quad,
                                               step_growth=True, t_min_stop=t_min)
    profile = OccupationProfile(t0=source.t0, tau=tau, values=vals,
                                cumulative=cum, result=res,
                                quad_error=evaluator.error_rel)
    if len(_PROFILE_CACHE) >= _PROFILE_CACHE_MAX:
        _PROFILE_CACHE.pop(next(iter(_PROFILE_CACHE)))
    _PROFILE_CACHE[key] = profile
    return profile


def _checked_denominator(profile: OccupationProfile, allow_unconverged: bool):
    if profile.result.value <= 0.0:
        raise IntegrationError(
            "detector occupation vanishes; the entry ratio is undefined",
            estimate=profile.result.error_estimate)
    if not profile.result.converged and not allow_unconverged:
        raise IntegrationError(
            "occupation normalizer did not reach its tail criterion before "
            f"the time cap {profile.result.t_max + profile.t0:.6g}",
            estimate=profile.result.error_estimate,
            value=profile.result.value)


def direction_probability(amp: MomentumAmplitude, det: DetectorGeometry,
                          source: EmissionEvent,
                          quad: QuadratureSpec | None = None) -> float:
    """Probability that the momentum direction points through the detector:
    the momentum-density mass over the detector's direction cone."""
    quad = quad or QuadratureSpec()
    _require_normalized(amp)
    radial = amp.scale ** 2 * radial_density_integral(amp)
    if amp.is_isotropic:
        angular = det.omega
    else:
        prev = None
        n_polar, n_azimuth = quad.polar_nodes, quad.azimuth_nodes
        for _ in range(6):
            dirs, w = cap_directions(det.axis, det.cos_cone, n_polar, n_azimuth)
            angular = float(w @ np.abs(amp.angular_profile(dirs @ amp.axis)) ** 2)
            if prev is not None and abs(angular - prev) <= quad.rtol * max(abs(angular), 1e-300):
                break
            prev = angular
            n_polar *= 2
            n_azimuth *= 2
    return float(min(max(radial * angular, 0.0), 1.0))


def conditional_entry_probability(amp: MomentumAmplitude, det: DetectorGeometry,
                                  source: EmissionEvent, t: float,
                                  quad: QuadratureSpec | None = None) -> float:
    """Ratio of the occupation integral over [t0, t] to its full value.

    Indifferent to any rescaling of the amplitude: the ratio cancels it,
    and the step heuristic works on a normalized copy.
    """
    quad = quad or QuadratureSpec()
    bound = direction_probability(normalize(amp), det, source, quad)
    quad = resolve_time_controls(amp, source, det.distance, det.extent_along_axis,
                                 quad, bound)
    tau = float(t) - source.t0
    if tau < 0.0:
        raise ValueError(f"time {t} precedes the emission time {source.t0}")
    profile = _occupation_profile(amp, det, source, quad)
    _checked_denominator(profile, allow_unconverged=False)
    head = float(np.interp(tau, profile.tau, profile.cumulative))
    return head / profile.result.value


def entry_probability(amp: MomentumAmplitude, det: DetectorGeometry,
                      source: EmissionEvent, t: float,
                      quad: QuadratureSpec | None = None) -> float:
    """Probability that the particle entered the detector during [t0, t]."""
    return (direction_probability(amp, det, source, quad)
            * conditional_entry_probability(amp, det, source, t, quad))


def _curve_from_profile(profile: OccupationProfile, p_direction: float,
                        quad: QuadratureSpec, grid: TimeGridSpec | None,
                        point_detector: bool,
                        omega: float | None) -> EntryProbabilityCurve:
    grid = grid or TimeGridSpec()
    dt = grid.dt if grid.dt is not None else quad.dt
    tau_end = (grid.t_end - profile.t0) if grid.t_end is not None \
        else profile.result.t_max
    if tau_end < 0.0:
        raise ValueError("grid t_end precedes the emission time")
    n = int(round(tau_end / dt)) if tau_end > 0.0 else 0
    tau_out = dt * np.arange(n + 1)
    conditional = np.interp(tau_out, profile.tau, profile.cumulative) \
        / profile.result.value
    return EntryProbabilityCurve(
        t=profile.t0 + tau_out, p_direction=p_direction,
        p_conditional=conditional, p_entry=p_direction * conditional,
        denominator=profile.result, point_detector=point_detector,
        quad_error=profile.quad_error, omega=omega)


def build_entry_curve(amp: MomentumAmplitude, det: DetectorGeometry,
                      source: EmissionEvent,
                      quad: QuadratureSpec | None = None,
                      grid: TimeGridSpec | None = None, *,
                      allow_unconverged: bool = False) -> EntryProbabilityCurve:
    """Sampled entry probabilities for a volume detector.

    The occupation normalizer is computed once and shared by every sample.
    """
    quad = quad or QuadratureSpec()
    p_direction = direction_probability(amp, det, source, quad)
    quad = resolve_time_controls(amp, source, det.distance,
                                 det.extent_along_axis, quad, p_direction)
    profile = _occupation_profile(amp, det, source, quad)
    _checked_denominator(profile, allow_unconverged)
    return _curve_from_profile(profile, p_direction, quad, grid,
                               point_detector=False, omega=det.omega)


def point_detector_curve(amp: MomentumAmplitude, x_detector,
                         source: EmissionEvent,
                         quad: QuadratureSpec | None = None,
                         grid: TimeGridSpec | None = None,
                         reference_solid_angle: float | None = None, *,
                         allow_unconverged: bool = False) -> EntryProbabilityCurve:
    """Entry curve for a detector reduced to the single point x_detector.

    The volume integral degenerates to |psi_nD(x_D, t)|^2, which the ratio
    normalizes away; no direction factor exists for a point, so it defaults
    to 1 (pure conditional curve).  Passing `reference_solid_angle` instead
    derives the factor from a direction cone of that size around the line
    of sight.
    """
    x_detector = np.asarray(x_detector, dtype=float)
    rel = x_detector - source.x0
    distance = float(np.linalg.norm(rel))
    if distance == 0.0:
        raise GeometryError("point detector coincides with the source")
    quad = quad or QuadratureSpec()
    p_direction = 1.0
    omega = None
    if reference_solid_angle is not None:
        if not 0.0 < reference_solid_angle <= 4.0 * np.pi:
            raise ValueError("reference_solid_angle must lie in (0, 4 pi]")
        half_angle = float(np.arccos(
            np.clip(1.0 - reference_solid_angle / (2.0 * np.pi), -1.0, 1.0)))
        cone = cap_detector(rel, half_angle, 0.5 * distance, 1.5 * distance, source)
        p_direction = direction_probability(amp, cone, source, quad)
        omega = reference_solid_angle
    quad = resolve_time_controls(amp, source, max(distance, 1e-300), 0.0,
                                 quad, p_direction)
    profile = _occupation_profile(amp, x_detector, source, quad)
    _checked_denominator(profile, allow_unconverged)
    return _curve_from_profile(profile, p_direction, quad, grid,
                               point_detector=True, omega=omega)
