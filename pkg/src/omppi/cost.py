"""Running and trajectory costs for the overtaking task.

These scalar functions are the reference implementation; the batched
kernels in :mod:`omppi.kernels` must agree with them.
"""
import math
from dataclasses import dataclass

import numpy as np

from .track import TrackSpec, capsule_r, is_outside_track


@dataclass(frozen=True)
class CostParams:
    w_lane: float = 0.001
    w_track: float = 600.0
    w_speed: float = 0.4
    v_target: float = 20.0
    collision_penalty: float = 500.0
    # Input energy, terminal and input-deviation terms are carried for
    # completeness; only zero is supported.
    input_weight: float = 0.0
    terminal_weight: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name, val in vars(self).items():
            if val < 0:
                raise ValueError(f"CostParams.{name} must be >= 0, got {val!r}")
        for name in ("input_weight", "terminal_weight", "gamma"):
            if getattr(self, name) != 0.0:
                raise ValueError(f"CostParams.{name} must be 0 (non-zero values are not supported)")


@dataclass(frozen=True)
class CollisionGeom:
    length: float = 63.0
    width: float = 30.0
    turn_radius: float = 10.5

    def __post_init__(self):
        for name, val in vars(self).items():
            if not val > 0:
                raise ValueError(f"CollisionGeom.{name} must be > 0, got {val!r}")

    @property
    def half_length(self) -> float:
        """Half-length of the extended region, including the turning radius."""
        return 0.5 * self.length + self.turn_radius

    @property
    def half_width(self) -> float:
        return 0.5 * self.width


def lane_cost(state, spec: TrackSpec, p: CostParams) -> float:
    r = float(capsule_r(state.x, state.y, spec))
    c = p.w_lane * (r - spec.inner_lane_radius) ** 2 * (r - spec.outer_lane_radius) ** 2
    if is_outside_track(state.x, state.y, spec):
        c += p.w_track
    return c


def speed_cost(state, p: CostParams) -> float:
    return p.w_speed * (state.v - p.v_target) ** 2


def in_collision_region(x: float, y: float, agent_pose, g: CollisionGeom) -> bool:
    xa, ya, tha = agent_pose
    dx, dy = xa - x, ya - y
    proj_f = abs(math.cos(tha) * dx + math.sin(tha) * dy)
    proj_l = abs(math.cos(tha - math.pi / 2) * dx + math.sin(tha - math.pi / 2) * dy)
    return proj_f < g.half_length and proj_l < g.half_width


def collision_cost(state, agent_pose, g: CollisionGeom, p: CostParams) -> float:
    return p.collision_penalty if in_collision_region(state.x, state.y, agent_pose, g) else 0.0


def running_cost(state, agent_poses, spec: TrackSpec, g: CollisionGeom, p: CostParams) -> float:
    c = lane_cost(state, spec, p) + speed_cost(state, p)
    for pose in agent_poses:
        c += collision_cost(state, pose, g, p)
    return c


class _Row:
    __slots__ = ("x", "y", "theta", "v", "omega")

    def __init__(self, row):
        self.x, self.y, self.theta, self.v, self.omega = (float(a) for a in row[:5])


def trajectory_cost(states, predicted_agents, spec: TrackSpec, g: CollisionGeom, p: CostParams) -> float:
    """Sum of running costs over an (N, 5) state array against (N, A, 3) agent poses."""
    states = np.asarray(states, dtype=float)
    predicted_agents = np.asarray(predicted_agents, dtype=float)
    if len(states) != len(predicted_agents):
        raise ValueError(
            f"horizon mismatch: {len(states)} states vs {len(predicted_agents)} agent rows"
        )
    return sum(
        running_cost(_Row(s), agents, spec, g, p) for s, agents in zip(states, predicted_agents)
    )


def cost_vector(spec: TrackSpec, g: CollisionGeom, p: CostParams) -> np.ndarray:
    """Packed constants for the batched kernels."""
    return np.array(
        [
            spec.half_straight,
            spec.inner_radius,
            spec.outer_radius,
            spec.inner_lane_radius,
            spec.outer_lane_radius,
            p.w_lane,
            p.w_track,
            p.w_speed,
            p.v_target,
            p.collision_penalty,
            g.half_length,
            g.half_width,
        ]
    )


def agent_frames(poses) -> np.ndarray:
    """(N, A, 3) poses -> (N, A, 4) rows of x, y, cos(theta), sin(theta)."""
    poses = np.asarray(poses, dtype=float)
    out = np.empty(poses.shape[:-1] + (4,))
    out[..., 0] = poses[..., 0]
    out[..., 1] = poses[..., 1]
    out[..., 2] = np.cos(poses[..., 2])
    out[..., 3] = np.sin(poses[..., 2])
    return out
