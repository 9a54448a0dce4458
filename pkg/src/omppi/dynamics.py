"""Differential-drive bot model and constant-speed obstacles.

State layout used in all arrays: ``[x, y, theta, v, omega]``; input layout
``[v_des, omega_des]``. Units are cm, s and rad.
"""
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .track import LaneId, TrackSpec, curve_point, perimeter

STATE_DIM = 5
INPUT_DIM = 2


@dataclass(frozen=True)
class BotState:
    x: float
    y: float
    theta: float
    v: float
    omega: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.v, self.omega])

    @classmethod
    def from_array(cls, a) -> "BotState":
        return cls(*(float(v) for v in a[:STATE_DIM]))


class ControlInput(NamedTuple):
    v_des: float
    omega_des: float


@dataclass(frozen=True)
class DynamicsParams:
    dt: float = 0.04
    alpha: float = 4.0 / 0.35
    v_max: float = 22.0
    omega_max: float = 2.8

    def __post_init__(self):
        for name in ("dt", "alpha", "v_max", "omega_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"DynamicsParams.{name} must be > 0, got {getattr(self, name)!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.dt, self.alpha, self.v_max, self.omega_max])


@dataclass(frozen=True)
class ObstacleState:
    lane: LaneId
    s: float
    speed: float


def saturate(value: float, bound: float) -> float:
    if abs(value) > bound:
        return math.copysign(bound, value)
    return value


def step(state: BotState, u, p: DynamicsParams) -> BotState:
    """One forward-Euler step; position and heading use the pre-step velocities."""
    v_des, w_des = u
    x, y, th, v, w = state.x, state.y, state.theta, state.v, state.omega
    dt = p.dt
    return BotState(
        x + v * math.cos(th) * dt,
        y + v * math.sin(th) * dt,
        th + w * dt,
        saturate(v + p.alpha * (v_des - v) * dt, p.v_max),
        saturate(w + p.alpha * (w_des - w) * dt, p.omega_max),
    )


def rollout_forward(state: BotState, inputs, p: DynamicsParams) -> np.ndarray:
    """Iterate :func:`step` over an (N, 2) input array; row k is the state after input k."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, INPUT_DIM)
    out = np.empty((len(inputs), STATE_DIM))
    s = state
    for k, u in enumerate(inputs):
        s = step(s, u, p)
        out[k] = (s.x, s.y, s.theta, s.v, s.omega)
    return out


def obstacle_step(o: ObstacleState, dt: float, spec: TrackSpec) -> ObstacleState:
    return replace(o, s=(o.s + o.speed * dt) % perimeter(o.lane, spec))


def obstacle_pose(o: ObstacleState, spec: TrackSpec):
    x, y, th = curve_point(o.lane.radius(spec), o.s, spec)
    return float(x), float(y), float(th)


def predict_obstacles(
    obstacles: Sequence[ObstacleState], n_steps: int, dt: float, spec: TrackSpec, start: int = 0
) -> np.ndarray:
    """Constant-speed poses, shape (n_steps, n_obstacles, 3).

    Row k holds the poses after ``start + k`` steps.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    out = np.empty((n_steps, len(obstacles), 3))
    k = np.arange(start, start + n_steps, dtype=float)
    for i, o in enumerate(obstacles):
        x, y, th = curve_point(o.lane.radius(spec), o.s + o.speed * dt * k, spec)
        out[:, i, 0] = x
        out[:, i, 1] = y
        out[:, i, 2] = th
    return out
