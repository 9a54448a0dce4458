"""Physics-based inverse of the bot model.

Given a smooth planar path, recover the speed/heading/turn-rate profile it
implies and the desired-velocity inputs that make the first-order velocity
loops reproduce that profile exactly. Saturation is deliberately ignored
here; the plant clamps whatever is finally applied.
"""
from dataclasses import dataclass

import numpy as np

from .dynamics import BotState, DynamicsParams
from .planner import OutputTrajectory, poly_deriv, poly_eval
from .track import wrap_angle

# Below this planned speed (cm/s) the path direction is treated as undefined.
MIN_HEADING_SPEED = 1e-9


@dataclass(frozen=True)
class PlannedKinematics:
    v_p: np.ndarray
    theta_p: np.ndarray
    omega_p: np.ndarray


@dataclass(frozen=True)
class InverseResult:
    inputs: np.ndarray  # (N, 2)
    planned_states: np.ndarray  # (N, 5)


def kinematics_from_velocity(xd, yd, theta0, omega0, dt):
    """Planned speed, unwrapped heading and turn rate on the grid j = 0..N.

    ``xd``/``yd`` are path velocities of shape (..., N+1). Where the speed
    vanishes the previous heading is held (``theta0`` before the first point).
    """
    xd = np.asarray(xd, dtype=float)
    yd = np.asarray(yd, dtype=float)
    v_p = np.hypot(xd, yd)
    raw = np.arctan2(yd, xd)
    moving = v_p > MIN_HEADING_SPEED
    theta_p = np.empty_like(raw)
    prev = np.broadcast_to(np.asarray(theta0, dtype=float), raw.shape[:-1]).copy()
    for j in range(raw.shape[-1]):
        cur = np.where(moving[..., j], prev + wrap_angle(raw[..., j] - prev), prev)
        theta_p[..., j] = cur
        prev = cur
    omega_p = np.empty_like(theta_p)
    omega_p[..., 0] = omega0
    omega_p[..., 1:] = np.diff(theta_p, axis=-1) / dt
    return v_p, theta_p, omega_p


def inverse_input_arrays(v_p, omega_p, alpha, dt):
    """(…, N+1) planned profiles -> (…, N, 2) desired-velocity inputs."""
    adt = alpha * dt
    v_p = np.asarray(v_p)
    omega_p = np.asarray(omega_p)
    out = np.empty(v_p.shape[:-1] + (v_p.shape[-1] - 1, 2))
    out[..., 0] = np.diff(v_p, axis=-1) / adt + v_p[..., :-1]
    out[..., 1] = np.diff(omega_p, axis=-1) / adt + omega_p[..., :-1]
    return out


def invert_coeffs(cx, cy, state: BotState, n_steps: int, p: DynamicsParams):
    """Batched inverse for cubic coefficient arrays of shape (M, 4).

    Returns ``inputs`` (M, N, 2) and ``planned`` (M, N, 5), where planned row
    j is the spline state at t = (j + 1) dt.
    """
    cx = np.asarray(cx, dtype=float)[:, None, :]
    cy = np.asarray(cy, dtype=float)[:, None, :]
    t = p.dt * np.arange(n_steps + 1)
    v_p, theta_p, omega_p = kinematics_from_velocity(
        poly_deriv(cx, t), poly_deriv(cy, t), state.theta, state.omega, p.dt
    )
    inputs = inverse_input_arrays(v_p, omega_p, p.alpha, p.dt)
    planned = np.empty(inputs.shape[:-1] + (5,))
    planned[..., 0] = poly_eval(cx, t[1:])
    planned[..., 1] = poly_eval(cy, t[1:])
    planned[..., 2] = theta_p[..., 1:]
    planned[..., 3] = v_p[..., 1:]
    planned[..., 4] = omega_p[..., 1:]
    return inputs, planned


def planned_kinematics(traj: OutputTrajectory, state: BotState, n_steps: int, dt: float) -> PlannedKinematics:
    t = dt * np.arange(n_steps + 1)
    v_p, theta_p, omega_p = kinematics_from_velocity(
        traj.sx.derivative(t), traj.sy.derivative(t), state.theta, state.omega, dt
    )
    return PlannedKinematics(v_p, theta_p, omega_p)


def inverse_inputs(pk: PlannedKinematics, alpha: float, dt: float) -> np.ndarray:
    return inverse_input_arrays(pk.v_p, pk.omega_p, alpha, dt)


def invert_trajectory(traj: OutputTrajectory, state: BotState, p: DynamicsParams) -> InverseResult:
    if not np.isclose(traj.dt, p.dt):
        raise ValueError(f"trajectory grid dt={traj.dt} does not match model dt={p.dt}")
    inputs, planned = invert_coeffs(
        traj.sx.coeffs[None], traj.sy.coeffs[None], state, traj.n_steps, p
    )
    return InverseResult(inputs[0], planned[0])
