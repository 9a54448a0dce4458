import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from omppi.cost import (
    CollisionGeom,
    CostParams,
    collision_cost,
    in_collision_region,
    lane_cost,
    running_cost,
    speed_cost,
    trajectory_cost,
)
from omppi.dynamics import BotState
from omppi.track import LaneId, TrackSpec, lane_point, perimeter

P = CostParams()
G = CollisionGeom()
T = TrackSpec()


def bot(x, y, v=20.0, th=0.0):
    return BotState(x, y, th, v, 0.0)


def test_defaults_and_thresholds():
    assert (P.w_lane, P.w_track, P.w_speed, P.v_target, P.collision_penalty) == (0.001, 600, 0.4, 20, 500)
    assert G.half_length == 42.0
    assert G.half_width == 15.0


def test_unsupported_terms_must_be_zero():
    with pytest.raises(ValueError, match="gamma"):
        CostParams(gamma=0.1)
    with pytest.raises(ValueError):
        CostParams(w_lane=-1)
    with pytest.raises(ValueError):
        CollisionGeom(width=0)


@pytest.mark.parametrize("x, y, c", [(85, 50, 0.0), (70, 0, 50.625), (120, 0, 5775.625), (55, -30, 0.0)])
def test_lane_cost_examples(x, y, c):
    assert lane_cost(bot(x, y), T, P) == pytest.approx(c, abs=1e-9)


@pytest.mark.parametrize("v, c", [(20, 0.0), (15, 10.0), (0, 160.0)])
def test_speed_cost_examples(v, c):
    assert speed_cost(bot(85, 0, v), P) == pytest.approx(c)


def test_collision_examples():
    agent = (85.0, 50.0, math.pi / 2)
    assert collision_cost(bot(85, 20), agent, G, P) == 500.0
    assert collision_cost(bot(85, -50), agent, G, P) == 0.0
    assert collision_cost(bot(65, 50), agent, G, P) == 0.0


def test_collision_boundary_is_strict():
    agent = (0.0, 0.0, 0.0)
    assert not in_collision_region(-42.0, 0.0, agent, G)
    assert in_collision_region(-41.999, 0.0, agent, G)
    assert not in_collision_region(0.0, 15.0, agent, G)


def test_running_cost_examples():
    assert running_cost(bot(85, 0, 20), [], T, G, P) == 0.0
    far = [(-85.0, 0.0, -math.pi / 2)]
    assert running_cost(bot(70, 0, 15), far, T, G, P) == pytest.approx(60.625)
    both = [(85.0, 10.0, math.pi / 2), (85.0, -10.0, math.pi / 2)]
    base = lane_cost(bot(70, 0, 15), T, P) + speed_cost(bot(70, 0, 15), P)
    assert running_cost(bot(85, 0, 15), both, T, G, P) == pytest.approx(speed_cost(bot(85, 0, 15), P) + 1000)
    assert base == pytest.approx(60.625)


pose = st.tuples(st.floats(-200, 200), st.floats(-250, 250), st.floats(-10, 10))


@given(st.floats(-200, 200), st.floats(-250, 250), st.floats(-30, 30), st.lists(pose, max_size=3))
def test_running_cost_matches_oracle_and_is_nonnegative(x, y, v, agents):
    c = running_cost(bot(x, y, v), agents, T, G, P)
    assert c == pytest.approx(oracles.running_cost(x, y, v, agents), rel=1e-12, abs=1e-9)
    assert c >= 0
    assert collision_cost(bot(x, y, v), agents[0], G, P) in (0.0, 500.0) if agents else True


@given(st.floats(-200, 200), st.floats(-250, 250), st.floats(-30, 30), st.lists(pose, max_size=3), pose)
def test_adding_an_agent_never_decreases_cost(x, y, v, agents, extra):
    before = running_cost(bot(x, y, v), agents, T, G, P)
    after = running_cost(bot(x, y, v), agents + [extra], T, G, P)
    assert after >= before


@given(pose, st.floats(-60, 60), st.floats(-60, 60), st.floats(-math.pi, math.pi))
def test_collision_rotation_invariance(agent, dx, dy, rot):
    xa, ya, tha = agent
    c, s = math.cos(rot), math.sin(rot)
    # Rotating the bot offset and the agent heading together about the agent
    # leaves the projections unchanged, up to rounding at the boundary.
    pf = abs(math.cos(tha) * -dx + math.sin(tha) * -dy)
    pl = abs(math.sin(tha) * -dx - math.cos(tha) * -dy)
    if min(abs(pf - 42), abs(pl - 15)) < 1e-6:
        return
    a = in_collision_region(xa + dx, ya + dy, agent, G)
    rdx, rdy = c * dx - s * dy, s * dx + c * dy
    b = in_collision_region(xa + rdx, ya + rdy, (xa, ya, tha + rot), G)
    assert a == b


@pytest.mark.parametrize("lane", list(LaneId))
def test_lane_cost_zero_on_centrelines(lane):
    per = perimeter(lane, T)
    for s in np.linspace(0, per, 97, endpoint=False):
        x, y, _ = lane_point(lane, s, T)
        assert lane_cost(bot(x, y), T, P) == pytest.approx(0.0, abs=1e-15)


def test_trajectory_cost():
    states = np.array([[85, 0, 0, 20, 0], [70, 0, 0, 15, 0], [120, 0, 0, 20, 0]], dtype=float)
    agents = np.zeros((3, 0, 3))
    assert trajectory_cost(states, agents, T, G, P) == pytest.approx(0 + 60.625 + 5775.625)
    const = np.tile([70.0, 0, 0, 15, 0], (7, 1))
    assert trajectory_cost(const, np.zeros((7, 0, 3)), T, G, P) == pytest.approx(7 * 60.625)
    one = trajectory_cost(states[:1], agents[:1], T, G, P)
    assert one == running_cost(bot(85, 0, 20), [], T, G, P)
    with pytest.raises(ValueError, match="mismatch"):
        trajectory_cost(states, agents[:2], T, G, P)
