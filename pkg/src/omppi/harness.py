"""Closed-loop episodes, overtake scoring and Monte Carlo success rates.

An overtake succeeds when the controlled bot (i) keeps driving
counter-clockwise, (ii) never leaves the track or enters an obstacle's
extended collision region, and (iii) is clear ahead of every obstacle when
the episode ends.
"""
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .controller import ControllerError, MppiParams, TaskModel, make_controller, step_rng
from .cost import CollisionGeom, in_collision_region, running_cost
from .dynamics import BotState, ObstacleState, obstacle_pose, obstacle_step, step
from .planner import SamplerError
from .track import LaneId, TrackSpec, corner_exit_travel, is_outside_track, perimeter, progress, unwrap_delta

# Allowed momentary backtrack (cm of lane arc length) before a run counts as turned around.
BACKTRACK_TOLERANCE = 5.0


class FailureReason(str, Enum):
    WRONG_DIRECTION = "WrongDirection"
    OUT_OF_TRACK = "OutOfTrack"
    COLLISION = "Collision"
    NOT_AHEAD = "NotAhead"
    TIMEOUT = "Timeout"
    CONTROLLER_ERROR = "ControllerError"


@dataclass(frozen=True)
class ObstacleSpec:
    """A constant-speed obstacle placed by arc length ``s`` or by a point ``xy``
    that is projected onto the lane centreline."""

    lane: LaneId
    speed: float
    s: Optional[float] = None
    xy: Optional[tuple] = None

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"obstacle speed must be >= 0, got {self.speed!r}")
        if (self.s is None) == (self.xy is None):
            raise ValueError("obstacle needs exactly one of 's' or 'xy'")

    def initial_state(self, spec: TrackSpec) -> ObstacleState:
        if self.s is not None:
            s = self.s % perimeter(self.lane, spec)
        else:
            s = progress(self.xy[0], self.xy[1], self.lane, spec)
        return ObstacleState(self.lane, float(s), float(self.speed))


@dataclass(frozen=True)
class ScenarioConfig:
    controller: str = "omppi"
    mppi: MppiParams = field(default_factory=MppiParams)
    model: TaskModel = field(default_factory=TaskModel)
    bot: BotState = BotState(85.0, -10.0, math.pi / 2, 15.0, 0.0)
    obstacles: tuple = ()
    # Travel (cm) of the first obstacle that ends the episode; "corner" means
    # the far end of the next semicircle on its lane.
    target_travel: Union[float, str, None] = "corner"
    max_duration: Optional[float] = None
    seed: int = 0
    stop_on_failure: bool = False
    name: str = ""

    def __post_init__(self):
        if self.controller not in ("mppi", "omppi"):
            raise ValueError(f"controller must be 'mppi' or 'omppi', got {self.controller!r}")
        if self.max_duration is None and (self.target_travel is None or not self.obstacles):
            raise ValueError("scenario needs max_duration or an obstacle travel target")
        if self.max_duration is not None and not self.max_duration > 0:
            raise ValueError(f"max_duration must be > 0, got {self.max_duration!r}")
        if isinstance(self.target_travel, str) and self.target_travel != "corner":
            raise ValueError(f"target_travel must be a number, 'corner' or null, got {self.target_travel!r}")

    def n_steps(self) -> int:
        """Control steps until the first termination rule fires."""
        dt = self.model.dynamics.dt
        limits = []
        if self.max_duration is not None:
            limits.append(math.ceil(self.max_duration / dt - 1e-9))
        if self.target_travel is not None and self.obstacles:
            o = self.obstacles[0].initial_state(self.model.track)
            travel = self.target_travel
            if travel == "corner":
                travel = corner_exit_travel(o.lane, o.s, self.model.track)
            if o.speed > 0:
                limits.append(math.ceil(travel / (o.speed * dt) - 1e-9))
        if not limits:
            raise ValueError("no termination rule can fire (stationary obstacle and no max_duration)")
        return max(1, min(limits))


@dataclass(frozen=True)
class StepRecord:
    t: float
    state: BotState
    applied: tuple
    obstacle_poses: tuple
    cost: float
    progress: float
    bot_progress_vs: tuple
    obstacle_progress: tuple


@dataclass
class EpisodeResult:
    success: bool
    failure_reason: Optional[FailureReason]
    trace: list
    final_bot_progress: tuple
    final_obstacle_progress: tuple
    n_steps: int
    deadline_reached: bool
    wall_time: float = 0.0
    error: str = ""

    def overtaken(self, geom: CollisionGeom) -> list:
        return [
            check_ahead(b, o, geom, self.deadline_reached)
            for b, o in zip(self.final_bot_progress, self.final_obstacle_progress)
        ]


def check_direction(trace, tolerance: float = BACKTRACK_TOLERANCE) -> bool:
    """Progress never falls more than ``tolerance`` below its running maximum."""
    prog = np.array([r.progress if isinstance(r, StepRecord) else r for r in trace], dtype=float)
    if prog.size == 0:
        return True
    return bool(np.all(prog >= np.maximum.accumulate(prog) - tolerance))


def _record_out(rec: StepRecord, spec: TrackSpec) -> bool:
    return is_outside_track(rec.state.x, rec.state.y, spec)


def _record_hit(rec: StepRecord, geom: CollisionGeom) -> bool:
    return any(in_collision_region(rec.state.x, rec.state.y, pose, geom) for pose in rec.obstacle_poses)


def check_collision_free(trace, geom: CollisionGeom, spec: TrackSpec) -> bool:
    return not any(_record_out(r, spec) or _record_hit(r, geom) for r in trace)


def check_ahead(bot_progress: float, obstacle_progress: float, geom: CollisionGeom, deadline_reached: bool = True) -> bool:
    """Bot clear of the obstacle's extended region, measured along the obstacle's lane."""
    return bool(deadline_reached) and bot_progress > obstacle_progress + geom.half_length


def _classify(trace, cfg: ScenarioConfig, bot_prog, obs_prog, deadline_reached) -> Optional[FailureReason]:
    spec, geom = cfg.model.track, cfg.model.geom
    if not check_direction(trace):
        return FailureReason.WRONG_DIRECTION
    if any(_record_out(r, spec) for r in trace):
        return FailureReason.OUT_OF_TRACK
    if any(_record_hit(r, geom) for r in trace):
        return FailureReason.COLLISION
    if not all(check_ahead(b, o, geom, deadline_reached) for b, o in zip(bot_prog, obs_prog)):
        travel_steps = _travel_steps(cfg)
        if travel_steps is None or cfg.n_steps() < travel_steps:
            return FailureReason.TIMEOUT
        return FailureReason.NOT_AHEAD
    return None


def _travel_steps(cfg: ScenarioConfig) -> Optional[int]:
    if cfg.target_travel is None or not cfg.obstacles:
        return None
    return replace(cfg, max_duration=None).n_steps()


def run_episode(cfg: ScenarioConfig, record_decisions: bool = False) -> EpisodeResult:
    t0 = time.perf_counter()
    model = cfg.model
    spec, dyn, geom = model.track, model.dynamics, model.geom
    obstacles = [o.initial_state(spec) for o in cfg.obstacles]
    lanes = [o.lane for o in obstacles]
    periods = [perimeter(lane, spec) for lane in lanes]
    outer_period = perimeter(LaneId.OUTER, spec)

    state = cfg.bot
    raw_dir = progress(state.x, state.y, LaneId.OUTER, spec)
    dir_prog = raw_dir
    raw_vs = [progress(state.x, state.y, lane, spec) for lane in lanes]
    obs_prog = [o.s for o in obstacles]
    # Place the bot within half a lap of each obstacle.
    bot_vs = [o.s + unwrap_delta(o.s, s, per) for o, s, per in zip(obstacles, raw_vs, periods)]

    n_total = cfg.n_steps()
    trace = []

    def finish(reason, deadline_reached, error=""):
        if reason is None:
            reason = _classify(trace, cfg, bot_vs, obs_prog, deadline_reached)
        return EpisodeResult(
            success=reason is None,
            failure_reason=reason,
            trace=trace,
            final_bot_progress=tuple(bot_vs),
            final_obstacle_progress=tuple(obs_prog),
            n_steps=len(trace),
            deadline_reached=deadline_reached,
            wall_time=time.perf_counter() - t0,
            error=error,
        )

    if is_outside_track(state.x, state.y, spec):
        return finish(FailureReason.OUT_OF_TRACK, False)

    controller = make_controller(cfg.controller, cfg.mppi, model)
    best_prog = dir_prog
    for k in range(n_total):
        try:
            decision = controller(state, obstacles, step_rng(cfg.seed, k))
        except (ControllerError, SamplerError) as exc:
            return finish(FailureReason.CONTROLLER_ERROR, False, str(exc))
        u = decision.applied
        state = step(state, u, dyn)
        obstacles = [obstacle_step(o, dyn.dt, spec) for o in obstacles]

        s = progress(state.x, state.y, LaneId.OUTER, spec)
        dir_prog += unwrap_delta(raw_dir, s, outer_period)
        raw_dir = s
        for i, (lane, per) in enumerate(zip(lanes, periods)):
            s = progress(state.x, state.y, lane, spec)
            bot_vs[i] += unwrap_delta(raw_vs[i], s, per)
            raw_vs[i] = s
            obs_prog[i] += obstacles[i].speed * dyn.dt

        poses = tuple(obstacle_pose(o, spec) for o in obstacles)
        rec = StepRecord(
            t=(k + 1) * dyn.dt,
            state=state,
            applied=(u.v_des, u.omega_des),
            obstacle_poses=poses,
            cost=running_cost(state, poses, spec, geom, model.cost),
            progress=dir_prog,
            bot_progress_vs=tuple(bot_vs),
            obstacle_progress=tuple(obs_prog),
        )
        trace.append(rec)

        if cfg.stop_on_failure:
            best_prog = max(best_prog, dir_prog)
            if dir_prog < best_prog - BACKTRACK_TOLERANCE:
                return finish(FailureReason.WRONG_DIRECTION, False)
            if _record_out(rec, spec):
                return finish(FailureReason.OUT_OF_TRACK, False)
            if _record_hit(rec, geom):
                return finish(FailureReason.COLLISION, False)
    return finish(None, True)


@dataclass
class SuccessRateReport:
    trials: int
    successes: int
    failure_counts: dict
    seeds: list
    outcomes: list
    wall_time_total: float = 0.0
    wall_time_mean: float = 0.0
    wall_time_max: float = 0.0

    @property
    def rate(self) -> float:
        return 100.0 * self.successes / self.trials


def _episode_summary(cfg: ScenarioConfig):
    res = run_episode(cfg)
    reason = res.failure_reason.value if res.failure_reason else None
    return res.success, reason, res.wall_time, res.overtaken(cfg.model.geom)


def monte_carlo(cfg: ScenarioConfig, trials: int, base_seed: int = 0, workers: int = 1) -> SuccessRateReport:
    """Run ``trials`` episodes with seeds ``base_seed + i`` and aggregate."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    seeds = [base_seed + i for i in range(trials)]
    cfgs = [replace(cfg, seed=s) for s in seeds]
    t0 = time.perf_counter()
    if workers > 1:
        # Forking after numba's OpenMP layer has started is unsafe.
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=ctx, initializer=kernels.set_backend, initargs=(kernels.backend(),)
        ) as pool:
            results = list(pool.map(_episode_summary, cfgs))
    else:
        results = [_episode_summary(c) for c in cfgs]
    total = time.perf_counter() - t0
    counts = {r.value: 0 for r in FailureReason}
    outcomes = []
    for seed, (ok, reason, _, overtaken) in zip(seeds, results):
        if reason is not None:
            counts[reason] += 1
        outcomes.append({"seed": seed, "success": ok, "failure_reason": reason, "overtaken": overtaken})
    times = [r[2] for r in results]
    return SuccessRateReport(
        trials=trials,
        successes=sum(1 for r in results if r[0]),
        failure_counts=counts,
        seeds=seeds,
        outcomes=outcomes,
        wall_time_total=total,
        wall_time_mean=float(np.mean(times)),
        wall_time_max=float(np.max(times)),
    )


CASE_IDS = (1, 2, 3, 4, "multi")


def case_preset(case_id, controller: Optional[str] = None) -> ScenarioConfig:
    """Scenario presets for the single-obstacle cases 1-4 and the two-obstacle run.

    ``controller`` switches the multi-obstacle preset between o-MPPI (case 1
    settings) and MPPI (case 3 settings).
    """
    key = str(case_id).strip().lower()
    single_obstacle = (ObstacleSpec(LaneId.OUTER, 10.0, xy=(85.0, 50.0)),)
    single_bot = BotState(85.0, -10.0, math.pi / 2, 15.0, 0.0)
    omppi = MppiParams(rollouts=50, horizon=2.0)
    if key == "1":
        return ScenarioConfig("omppi", omppi, bot=single_bot, obstacles=single_obstacle, name="case1")
    if key == "2":
        p = MppiParams(rollouts=50, horizon=2.0, initial_mean=(15.0, 0.0))
        return ScenarioConfig("mppi", p, bot=single_bot, obstacles=single_obstacle, name="case2")
    if key == "3":
        p = MppiParams(rollouts=1000, horizon=8.0, initial_mean=(15.0, 0.0))
        return ScenarioConfig("mppi", p, bot=single_bot, obstacles=single_obstacle, name="case3")
    if key == "4":
        p = MppiParams(rollouts=2000, horizon=8.0, initial_mean=(10.0, 0.0))
        return ScenarioConfig("mppi", p, bot=single_bot, obstacles=single_obstacle, name="case4")
    if key == "multi":
        kind = controller or "omppi"
        p = omppi if kind == "omppi" else MppiParams(rollouts=1000, horizon=8.0, initial_mean=(15.0, 0.0))
        return ScenarioConfig(
            kind,
            p,
            bot=BotState(-55.0, -10.0, -math.pi / 2, 15.0, 0.0),
            obstacles=(
                ObstacleSpec(LaneId.INNER, 10.0, xy=(23.0, -156.0)),
                ObstacleSpec(LaneId.OUTER, 12.0, xy=(-55.0, -75.0)),
            ),
            target_travel=None,
            max_duration=MULTI_DURATION,
            name="multi",
        )
    raise ValueError(f"unknown case {case_id!r}; expected one of {CASE_IDS}")


# Episode length (s) for the two-obstacle run, which has no natural end point.
MULTI_DURATION = 40.0


def occupied_cells(xy, cell: float = 1.0) -> np.ndarray:
    """Unique integer grid cells (rows of ix, iy) visited by the points."""
    idx = np.floor(np.asarray(xy, dtype=float).reshape(-1, 2) / cell).astype(np.int64)
    return np.unique(idx, axis=0)


def exploration_area(
    state: BotState,
    params: MppiParams,
    rates: Sequence[float],
    seed: int = 0,
    model: Optional[TaskModel] = None,
    horizon: float = 2.0,
    rollouts: int = 2000,
    cell: float = 1.0,
    return_cells: bool = False,
):
    """Area (cm^2) covered by open-loop MPPI rollouts at each control rate (Hz).

    Every rate uses the same initial state, nominal input, per-step input
    covariance, rollout count, horizon and seed; only the step size changes.
    """
    model = model or TaskModel()
    std = np.sqrt(np.asarray(params.noise_var, dtype=float))
    mean = np.asarray(params.initial_mean, dtype=float)
    x0 = state.as_array()
    areas, grids = {}, {}
    for rate in rates:
        if not rate > 0:
            raise ValueError(f"control rate must be > 0 Hz, got {rate!r}")
        dyn = replace(model.dynamics, dt=1.0 / rate)
        n = max(1, int(round(horizon * rate)))
        noise = np.random.default_rng(seed).standard_normal((rollouts, n, 2)) * std
        states = kernels.rollout_states(x0, mean + noise, dyn.as_array())
        pts = np.concatenate([x0[None, :2], states[..., :2].reshape(-1, 2)])
        cells = occupied_cells(pts, cell)
        areas[rate] = float(len(cells) * cell * cell)
        grids[rate] = cells
    return (areas, grids) if return_cells else areas
