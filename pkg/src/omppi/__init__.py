"""Standard and output-sampled MPPI for bots overtaking on a stadium track."""
from .controller import MppiParams, TaskModel, compute_weights, mppi_step, omppi_step, warm_start
from .cost import CollisionGeom, CostParams
from .dynamics import BotState, ControlInput, DynamicsParams, ObstacleState
from .harness import ScenarioConfig, case_preset, exploration_area, monte_carlo, run_episode
from .track import LaneId, TrackSpec

__version__ = "0.1.0"
