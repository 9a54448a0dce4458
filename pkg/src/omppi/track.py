"""Stadium track geometry.

The track is a capsule: two straights parallel to the y-axis joined by two
semicircles centred at ``(0, +half_straight)`` and ``(0, -half_straight)``.
All bots travel counter-clockwise, so the right straight (x > 0) is driven
in +y. Arc-length coordinates start at ``(lane_radius, 0)`` on the right
straight.

Most helpers accept scalars or numpy arrays.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TrackSpec:
    lane_width: float = 30.0
    straight_length: float = 150.0
    inner_radius: float = 40.0

    def __post_init__(self):
        for name in ("lane_width", "straight_length", "inner_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"TrackSpec.{name} must be > 0, got {getattr(self, name)!r}")

    @property
    def half_straight(self) -> float:
        return self.straight_length / 2.0

    @property
    def inner_lane_radius(self) -> float:
        return self.inner_radius + self.lane_width / 2.0

    @property
    def outer_lane_radius(self) -> float:
        return self.inner_radius + 1.5 * self.lane_width

    @property
    def outer_radius(self) -> float:
        return self.inner_radius + 2.0 * self.lane_width

    def perimeter_at(self, radius: float) -> float:
        return 2.0 * self.straight_length + TWO_PI * radius


class LaneId(str, Enum):
    INNER = "inner"
    OUTER = "outer"

    def radius(self, spec: TrackSpec) -> float:
        return spec.inner_lane_radius if self is LaneId.INNER else spec.outer_lane_radius


def perimeter(lane: LaneId, spec: TrackSpec) -> float:
    return spec.perimeter_at(lane.radius(spec))


class CapsuleCoord(NamedTuple):
    r: float
    z: float
    on_straight: bool


class LaneProjection(NamedTuple):
    s: float
    inside: bool


def wrap_angle(theta):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - theta, TWO_PI)


def _axial_excess(y, half):
    return np.where(np.abs(y) < half, 0.0, y - half * np.sign(y))


def capsule_r(x, y, spec: TrackSpec):
    z = _axial_excess(y, spec.half_straight)
    return np.sqrt(x * x + z * z)


def capsule_coord(x: float, y: float, spec: TrackSpec) -> CapsuleCoord:
    half = spec.half_straight
    on_straight = abs(y) < half
    z = 0.0 if on_straight else y - half * np.sign(y)
    return CapsuleCoord(float(np.hypot(x, z)), float(z), on_straight)


def is_outside_track(x, y, spec: TrackSpec):
    r = capsule_r(x, y, spec)
    out = (r < spec.inner_radius) | (r > spec.outer_radius)
    return bool(out) if np.ndim(out) == 0 else out


def _normal(x, y, spec: TrackSpec):
    """Outward unit normal of the capsule family through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    yc = np.clip(y, -spec.half_straight, spec.half_straight)
    dx, dy = x, y - yc
    r = np.hypot(dx, dy)
    safe = r > 0.0
    rr = np.where(safe, r, 1.0)
    nx = np.where(safe, dx / rr, 1.0)
    ny = np.where(safe, dy / rr, 0.0)
    return nx, ny


def _segment_bounds(radius, spec: TrackSpec):
    half = spec.half_straight
    s1 = half
    s2 = s1 + np.pi * radius
    s3 = s2 + spec.straight_length
    s4 = s3 + np.pi * radius
    return s1, s2, s3, s4, s4 + half


def station(x, y, radius, spec: TrackSpec):
    """Arc-length coordinate in [0, perimeter) on the concentric curve of ``radius``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = spec.half_straight
    s1, s2, s3, _, per = _segment_bounds(radius, spec)
    nx, ny = _normal(x, y, spec)
    straight = np.abs(y) < half
    right = nx >= 0.0
    s_straight = np.where(right, y, s2 + (half - y))
    phi = np.arctan2(ny, nx)
    s_top = s1 + radius * phi
    psi = np.where(phi <= 0.0, phi + TWO_PI, phi)
    s_bottom = s3 + radius * (psi - np.pi)
    s = np.where(straight, s_straight, np.where(y >= half, s_top, s_bottom))
    s = np.mod(s, per)
    return float(s) if s.ndim == 0 else s


def station_frame(radius, s, spec: TrackSpec):
    """Base point on the central segment and outward normal at arc length ``s``.

    The centreline point at ``radius`` is ``base + radius * normal``; a point
    at another radius r' with the same station is ``base + r' * normal``.
    """
    s = np.asarray(s, dtype=float)
    half = spec.half_straight
    s1, s2, s3, s4, per = _segment_bounds(radius, spec)
    s = np.mod(s, per)
    phi_top = (s - s1) / radius
    psi_bot = np.pi + (s - s3) / radius
    by = np.select(
        [s < s1, s < s2, s < s3, s < s4],
        [s, half, half - (s - s2), -half],
        -half + (s - s4),
    )
    nx = np.select(
        [s < s1, s < s2, s < s3, s < s4],
        [1.0, np.cos(phi_top), -1.0, np.cos(psi_bot)],
        1.0,
    )
    ny = np.select(
        [s < s1, s < s2, s < s3, s < s4],
        [0.0, np.sin(phi_top), 0.0, np.sin(psi_bot)],
        0.0,
    )
    return np.zeros_like(by), by, nx, ny


def tangent_heading(nx, ny):
    """Counter-clockwise travel direction given the outward normal."""
    return np.arctan2(nx, -ny)


def curve_point(radius, s, spec: TrackSpec):
    bx, by, nx, ny = station_frame(radius, s, spec)
    return bx + radius * nx, by + radius * ny, tangent_heading(nx, ny)


def lane_point(lane: LaneId, s: float, spec: TrackSpec):
    """(x, y, heading) on a lane centreline at arc length ``s``."""
    x, y, th = curve_point(lane.radius(spec), s, spec)
    return float(x), float(y), float(th)


def progress(x: float, y: float, lane_hint: LaneId, spec: TrackSpec) -> float:
    return station(x, y, lane_hint.radius(spec), spec)


def project_to_lane(x: float, y: float, lane: LaneId, spec: TrackSpec) -> LaneProjection:
    """Arc length of the nearest centreline point plus an in-track flag."""
    return LaneProjection(progress(x, y, lane, spec), not is_outside_track(x, y, spec))


def road_heading(x, y, spec: TrackSpec):
    """CCW road direction at (x, y), wrapped to (-pi, pi]."""
    nx, ny = _normal(x, y, spec)
    th = tangent_heading(nx, ny)
    return float(th) if np.ndim(th) == 0 else th


def corner_exit_travel(lane: LaneId, s: float, spec: TrackSpec) -> float:
    """Arc travel from ``s`` to the far end of the next semicircle on ``lane``."""
    s1, s2, s3, s4, per = _segment_bounds(lane.radius(spec), spec)
    s = float(np.mod(s, per))
    if s < s2:
        return s2 - s
    if s < s4:
        return s4 - s
    return per - s + s2


def unwrap_delta(prev: float, new: float, period: float) -> float:
    """Smallest-magnitude signed change from ``prev`` to ``new`` modulo ``period``."""
    d = (new - prev) % period
    if d > period / 2.0:
        d -= period
    return d
