"""Output-space sampling: endpoint region, endpoint draws and cubic fits.

The region of interest is a rectangle in road coordinates (arc length along
the track, radial offset across it), so it bends with the curves instead of
leaving the track.
"""
from dataclasses import dataclass

import numpy as np

from .dynamics import BotState, DynamicsParams
from .track import TrackSpec, capsule_r, is_outside_track, road_heading, station, station_frame, tangent_heading


class SamplerError(RuntimeError):
    pass


def hermite_coeffs(p0, v0, p1, v1, T):
    """Cubic coefficients (a0..a3 on the last axis) matching position and
    velocity at t=0 and t=T."""
    p0, v0, p1, v1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (p0, v0, p1, v1)))
    dp = p1 - p0
    a2 = (3.0 * dp - (2.0 * v0 + v1) * T) / T**2
    a3 = (-2.0 * dp + (v0 + v1) * T) / T**3
    return np.stack([p0, v0, a2, a3], axis=-1)


def poly_eval(coeffs, t):
    a0, a1, a2, a3 = np.moveaxis(np.asarray(coeffs), -1, 0)
    return a0 + t * (a1 + t * (a2 + t * a3))


def poly_deriv(coeffs, t):
    _, a1, a2, a3 = np.moveaxis(np.asarray(coeffs), -1, 0)
    return a1 + t * (2.0 * a2 + 3.0 * t * a3)


@dataclass(frozen=True)
class Spline1D:
    a0: float
    a1: float
    a2: float
    a3: float
    T: float

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])

    def __call__(self, t):
        return poly_eval(self.coeffs, t)

    def derivative(self, t):
        return poly_deriv(self.coeffs, t)


@dataclass(frozen=True)
class OutputTrajectory:
    sx: Spline1D
    sy: Spline1D
    dt: float
    n_steps: int

    @property
    def times(self) -> np.ndarray:
        """Grid t = dt, 2 dt, ..., N dt."""
        return self.dt * np.arange(1, self.n_steps + 1)

    @property
    def samples(self) -> np.ndarray:
        t = self.times
        return np.column_stack([self.sx(t), self.sy(t)])

    @property
    def velocities(self) -> np.ndarray:
        t = self.times
        return np.column_stack([self.sx.derivative(t), self.sy.derivative(t)])


@dataclass(frozen=True)
class RegionOfInterest:
    center: tuple
    station: float
    ref_radius: float
    forward_axis: tuple
    lateral_axis: tuple
    forward_extent: tuple
    lateral_extent: tuple
    spec: TrackSpec

    @property
    def degenerate(self) -> bool:
        d0, d1 = self.forward_extent
        l0, l1 = self.lateral_extent
        return not (d1 > d0 and l1 > l0)

    def to_xy(self, d, lat):
        """Map road coordinates (forward arc length, radial offset) to (x, y)."""
        bx, by, nx, ny = station_frame(self.ref_radius, self.station + np.asarray(d), self.spec)
        r = self.ref_radius + np.asarray(lat)
        return bx + r * nx, by + r * ny


def build_roi(
    state: BotState, T: float, p: DynamicsParams, spec: TrackSpec, min_fraction: float = 0.25
) -> RegionOfInterest:
    """Endpoint region reachable within the horizon at full speed, spanning both lanes."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T!r}")
    if not 0.0 <= min_fraction < 1.0:
        raise ValueError(f"min_fraction must be in [0, 1), got {min_fraction!r}")
    r_ref = float(np.clip(capsule_r(state.x, state.y, spec), spec.inner_radius, spec.outer_radius))
    s0 = station(state.x, state.y, r_ref, spec)
    bx, by, nx, ny = (float(a) for a in station_frame(r_ref, s0, spec))
    th = float(tangent_heading(nx, ny))
    reach = p.v_max * T
    return RegionOfInterest(
        center=(bx + r_ref * nx, by + r_ref * ny),
        station=s0,
        ref_radius=r_ref,
        forward_axis=(np.cos(th), np.sin(th)),
        lateral_axis=(nx, ny),
        forward_extent=(min_fraction * reach, reach),
        lateral_extent=(spec.inner_radius - r_ref, spec.outer_radius - r_ref),
        spec=spec,
    )


def sample_endpoints(
    roi: RegionOfInterest, rng: np.random.Generator, count: int, max_tries: int = 100, strict: bool = True
):
    """Uniform draws over the road-frame rectangle, redrawing any that land off track.

    Returns (count, 2) positions. With ``strict=False`` draws that are still
    off track after ``max_tries`` come back as NaN instead of raising.
    """
    if roi.degenerate:
        raise SamplerError("region of interest has zero area")
    (d0, d1), (l0, l1) = roi.forward_extent, roi.lateral_extent
    out = np.empty((count, 2))
    todo = np.arange(count)
    for _ in range(max_tries):
        u = rng.random((len(todo), 2))
        x, y = roi.to_xy(d0 + (d1 - d0) * u[:, 0], l0 + (l1 - l0) * u[:, 1])
        out[todo, 0] = x
        out[todo, 1] = y
        todo = todo[is_outside_track(x, y, roi.spec)]
        if len(todo) == 0:
            return out
    if not strict:
        out[todo] = np.nan
        return out
    raise SamplerError(f"{len(todo)} endpoint(s) still off track after {max_tries} draws")


def sample_endpoint(roi: RegionOfInterest, rng: np.random.Generator, max_tries: int = 100):
    x, y = sample_endpoints(roi, rng, 1, max_tries)[0]
    return float(x), float(y)


def endpoint_heading(x_e, y_e, spec: TrackSpec):
    return road_heading(x_e, y_e, spec)


def spline_coeffs(state: BotState, x_e, y_e, th_e, T: float):
    """Batched boundary-value fit; returns (cx, cy), each (..., 4)."""
    x_e = np.asarray(x_e, dtype=float)
    y_e = np.asarray(y_e, dtype=float)
    v_e = np.hypot(x_e - state.x, y_e - state.y) / T
    c, s = np.cos(state.theta), np.sin(state.theta)
    cx = hermite_coeffs(state.x, state.v * c, x_e, v_e * np.cos(th_e), T)
    cy = hermite_coeffs(state.y, state.v * s, y_e, v_e * np.sin(th_e), T)
    return cx, cy


def fit_spline(state: BotState, endpoint, T: float, dt: float = 0.04) -> OutputTrajectory:
    """Cubic per axis from the current position/velocity to ``endpoint = (x_e, y_e, theta_e)``
    reached at speed chord/T."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T!r}")
    x_e, y_e, th_e = endpoint
    cx, cy = spline_coeffs(state, x_e, y_e, th_e, T)
    return OutputTrajectory(
        Spline1D(*(float(a) for a in cx), T),
        Spline1D(*(float(a) for a in cy), T),
        dt,
        int(round(T / dt)),
    )
