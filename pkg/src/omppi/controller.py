"""Standard MPPI and output-sampled MPPI (o-MPPI).

Both share the cost, the softmin weighting and the weighted-average update;
they differ only in where rollouts come from. MPPI perturbs a warm-started
input sequence and runs the forward model. o-MPPI draws trajectory endpoints
on the road, fits cubics from the current state and inverts them to inputs.

Randomness for control step ``k`` of an episode with seed ``s`` comes from
``step_rng(s, k)``; row m of every draw belongs to rollout m, so a decision
depends only on (seed, step, state, obstacles, params).
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cost import CollisionGeom, CostParams, agent_frames, cost_vector
from .dynamics import BotState, ControlInput, DynamicsParams, ObstacleState, predict_obstacles
from .inverse import invert_coeffs
from .planner import build_roi, sample_endpoints, spline_coeffs
from .track import TrackSpec, road_heading


class ControllerError(RuntimeError):
    pass


@dataclass(frozen=True)
class MppiParams:
    rollouts: int = 50
    horizon: float = 2.0
    temperature: float = 2.0
    noise_var: tuple = (4.0, 1.0)
    initial_mean: tuple = (15.0, 0.0)
    roi_min_fraction: float = 0.25
    max_endpoint_tries: int = 100

    def __post_init__(self):
        if int(self.rollouts) != self.rollouts or self.rollouts < 1:
            raise ValueError(f"MppiParams.rollouts must be an integer >= 1, got {self.rollouts!r}")
        if not self.horizon > 0:
            raise ValueError(f"MppiParams.horizon must be > 0, got {self.horizon!r}")
        if not self.temperature > 0:
            raise ValueError(f"MppiParams.temperature must be > 0, got {self.temperature!r}")
        if len(self.noise_var) != 2 or min(self.noise_var) < 0:
            raise ValueError(f"MppiParams.noise_var must be two non-negative variances, got {self.noise_var!r}")
        if len(self.initial_mean) != 2:
            raise ValueError(f"MppiParams.initial_mean must be (v_des, omega_des), got {self.initial_mean!r}")
        if not 0.0 <= self.roi_min_fraction < 1.0:
            raise ValueError(f"MppiParams.roi_min_fraction must be in [0, 1), got {self.roi_min_fraction!r}")

    def steps(self, dt: float) -> int:
        return max(1, int(round(self.horizon / dt)))


@dataclass(frozen=True)
class TaskModel:
    """Everything a rollout needs besides the controller knobs."""

    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    track: TrackSpec = field(default_factory=TrackSpec)
    cost: CostParams = field(default_factory=CostParams)
    geom: CollisionGeom = field(default_factory=CollisionGeom)

    @cached_property
    def dyn_vector(self) -> np.ndarray:
        return self.dynamics.as_array()

    @cached_property
    def cost_vector(self) -> np.ndarray:
        return cost_vector(self.track, self.geom, self.cost)

    def agent_frames(self, obstacles: Sequence[ObstacleState], n_steps: int) -> np.ndarray:
        # Row k pairs with the rollout state after k+1 steps.
        poses = predict_obstacles(obstacles, n_steps, self.dynamics.dt, self.track, start=1)
        return agent_frames(poses)


@dataclass(frozen=True)
class Rollout:
    inputs: np.ndarray
    states: np.ndarray
    cost: float
    perturbations: Optional[np.ndarray] = None

    @property
    def outputs(self) -> np.ndarray:
        return self.states[:, :2]


@dataclass(frozen=True)
class ControlDecision:
    optimized_sequence: np.ndarray
    weights: np.ndarray
    costs: np.ndarray
    mean_sequence: np.ndarray
    rollouts: Optional[list] = None

    @property
    def applied(self) -> ControlInput:
        return ControlInput(*(float(a) for a in self.optimized_sequence[0]))

    @property
    def min_cost(self) -> float:
        return float(np.min(self.costs[np.isfinite(self.costs)]))

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.costs[np.isfinite(self.costs)]))

    @property
    def effective_sample_size(self) -> float:
        return float(1.0 / np.sum(self.weights**2))


def step_rng(seed: int, step_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(step_index)]))


def compute_weights(costs, temperature: float) -> np.ndarray:
    """Softmin weights exp(-(S - min S)/lambda), normalised.

    Non-finite costs get weight 0; if nothing is finite a ControllerError is raised.
    """
    costs = np.asarray(costs, dtype=float)
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature!r}")
    finite = np.isfinite(costs)
    if not finite.any():
        raise ControllerError("every rollout has a non-finite cost")
    w = np.zeros_like(costs)
    c = costs[finite]
    w[finite] = np.exp(-(c - c.min()) / temperature)
    return w / w.sum()


def _weighted_sum(w, seqs):
    keep = w > 0.0
    return (w[keep, None, None] * seqs[keep]).sum(axis=0)


def warm_start(prev_sequence, initial_mean) -> np.ndarray:
    seq = np.asarray(prev_sequence, dtype=float)
    out = np.empty_like(seq)
    out[:-1] = seq[1:]
    out[-1] = initial_mean
    return out


def mppi_step(
    state: BotState,
    mean_seq,
    obstacles: Sequence[ObstacleState],
    params: MppiParams,
    rng: np.random.Generator,
    model: TaskModel,
    return_rollouts: bool = False,
) -> ControlDecision:
    mean_seq = np.asarray(mean_seq, dtype=float)
    n = mean_seq.shape[0]
    m = params.rollouts
    std = np.sqrt(np.asarray(params.noise_var, dtype=float))
    eps = rng.standard_normal((m, n, 2)) * std
    inputs = mean_seq[None] + eps
    x0 = state.as_array()
    frames = model.agent_frames(obstacles, n)
    costs = kernels.rollout_costs(x0, inputs, model.dyn_vector, frames, model.cost_vector)
    w = compute_weights(costs, params.temperature)
    optimized = mean_seq + _weighted_sum(w, eps)
    rollouts = None
    if return_rollouts:
        states = kernels.rollout_states(x0, inputs, model.dyn_vector)
        rollouts = [Rollout(inputs[i], states[i], float(costs[i]), eps[i]) for i in range(m)]
    return ControlDecision(optimized, w, costs, mean_seq, rollouts)


def omppi_step(
    state: BotState,
    obstacles: Sequence[ObstacleState],
    params: MppiParams,
    rng: np.random.Generator,
    model: TaskModel,
    return_rollouts: bool = False,
) -> ControlDecision:
    dyn = model.dynamics
    n = params.steps(dyn.dt)
    horizon = n * dyn.dt
    roi = build_roi(state, horizon, dyn, model.track, params.roi_min_fraction)
    if roi.degenerate:
        raise ControllerError("endpoint region has zero area")
    ends = sample_endpoints(roi, rng, params.rollouts, params.max_endpoint_tries, strict=False)
    th_e = road_heading(ends[:, 0], ends[:, 1], model.track)
    cx, cy = spline_coeffs(state, ends[:, 0], ends[:, 1], th_e, horizon)
    inputs, planned = invert_coeffs(cx, cy, state, n, dyn)
    frames = model.agent_frames(obstacles, n)
    costs = kernels.path_costs(planned[..., :2], planned[..., 3], frames, model.cost_vector)
    w = compute_weights(costs, params.temperature)
    optimized = _weighted_sum(w, inputs)
    valid = w > 0.0
    mean_seq = inputs[valid].mean(axis=0)
    rollouts = None
    if return_rollouts:
        rollouts = [Rollout(inputs[i], planned[i], float(costs[i])) for i in range(params.rollouts)]
    return ControlDecision(optimized, w, costs, mean_seq, rollouts)


ompli_step = omppi_step


class MPPIController:
    """Closed-loop wrapper that carries the warm-started mean between steps."""

    kind = "mppi"

    def __init__(self, params: MppiParams, model: TaskModel):
        self.params = params
        self.model = model
        self.n_steps = params.steps(model.dynamics.dt)
        self.reset()

    def reset(self):
        self.mean = np.tile(np.asarray(self.params.initial_mean, dtype=float), (self.n_steps, 1))

    def __call__(self, state, obstacles, rng, return_rollouts=False) -> ControlDecision:
        dec = mppi_step(state, self.mean, obstacles, self.params, rng, self.model, return_rollouts)
        self.mean = warm_start(dec.optimized_sequence, self.params.initial_mean)
        return dec


class OMPPIController:
    kind = "omppi"

    def __init__(self, params: MppiParams, model: TaskModel):
        self.params = params
        self.model = model

    def reset(self):
        pass

    def __call__(self, state, obstacles, rng, return_rollouts=False) -> ControlDecision:
        return omppi_step(state, obstacles, self.params, rng, self.model, return_rollouts)


def make_controller(kind: str, params: MppiParams, model: TaskModel):
    if kind == "mppi":
        return MPPIController(params, model)
    if kind in ("omppi", "o-mppi"):
        return OMPPIController(params, model)
    raise ValueError(f"unknown controller kind {kind!r}; expected 'mppi' or 'omppi'")
