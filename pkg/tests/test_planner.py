import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import angle_close
from omppi.dynamics import BotState, DynamicsParams
from omppi.planner import (
    RegionOfInterest,
    SamplerError,
    build_roi,
    endpoint_heading,
    fit_spline,
    hermite_coeffs,
    sample_endpoint,
    sample_endpoints,
    spline_coeffs,
)
from omppi.track import TrackSpec, capsule_coord, is_outside_track, progress, LaneId

P = DynamicsParams()
T = TrackSpec()
START = BotState(85.0, -10.0, math.pi / 2, 15.0, 0.0)


def test_roi_extents():
    roi = build_roi(START, 2.0, P, T)
    assert roi.forward_extent == pytest.approx((11.0, 44.0))
    lo, hi = roi.lateral_extent
    assert (roi.ref_radius + lo, roi.ref_radius + hi) == pytest.approx((40.0, 100.0))
    roi4 = build_roi(START, 4.0, P, T)
    assert roi4.forward_extent == pytest.approx((22.0, 88.0))
    assert build_roi(START, 2.0, P, T, min_fraction=0.0).forward_extent == pytest.approx((0.0, 44.0))


def test_roi_axes_follow_road():
    roi = build_roi(BotState(-70.0, 0.0, -math.pi / 2, 15, 0), 2.0, P, T)
    assert roi.forward_axis == pytest.approx((0.0, -1.0), abs=1e-12)
    assert roi.lateral_axis == pytest.approx((-1.0, 0.0), abs=1e-12)


def test_roi_rejects_bad_horizon():
    with pytest.raises(ValueError):
        build_roi(START, 0.0, P, T)


def test_degenerate_roi_raises():
    roi = build_roi(START, 2.0, P, T)
    flat = RegionOfInterest(**{**roi.__dict__, "forward_extent": (5.0, 5.0)})
    assert flat.degenerate
    with pytest.raises(SamplerError):
        sample_endpoint(flat, np.random.default_rng(0))


def test_rejection_limit_raises_or_flags():
    roi = build_roi(START, 2.0, P, T)
    # Shift the lateral band completely outside the annulus.
    off = RegionOfInterest(**{**roi.__dict__, "lateral_extent": (30.0, 40.0)})
    with pytest.raises(SamplerError):
        sample_endpoints(off, np.random.default_rng(0), 4, max_tries=100)
    out = sample_endpoints(off, np.random.default_rng(0), 4, max_tries=100, strict=False)
    assert np.isnan(out).all()


@pytest.mark.parametrize("state", [START, BotState(70, 60, 1.9, 18, 0.3), BotState(-60, -80, -0.5, 12, 0)])
def test_endpoints_never_off_track(state):
    roi = build_roi(state, 2.0, P, T)
    pts = sample_endpoints(roi, np.random.default_rng(7), 5000)
    assert not is_outside_track(pts[:, 0], pts[:, 1], T).any()


def test_endpoint_mean_matches_region_centroid():
    # Bot near the top corner so the region bends around the arc.
    state = BotState(85.0, 60.0, math.pi / 2, 15.0, 0.0)
    roi = build_roi(state, 2.0, P, T)
    n = 100_000
    pts = sample_endpoints(roi, np.random.default_rng(99), n)
    (d0, d1), (l0, l1) = roi.forward_extent, roi.lateral_extent
    # Midpoint-rule centroid of the uniform (d, lat) rectangle mapped to x, y.
    k = 200
    ds = d0 + (d1 - d0) * (np.arange(k) + 0.5) / k
    ls = l0 + (l1 - l0) * (np.arange(k) + 0.5) / k
    grid = np.array([oracles.road_point(roi.ref_radius, roi.station + d, roi.ref_radius + l) for d in ds for l in ls])
    centroid = grid.mean(axis=0)
    sigma = grid.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(pts.mean(axis=0) - centroid) < 3 * sigma)


@pytest.mark.parametrize("x, y, th", [(85, 0, math.pi / 2), (-85, 0, -math.pi / 2), (0, 160, math.pi)])
def test_endpoint_heading(x, y, th):
    assert angle_close(endpoint_heading(x, y, T), th)


def test_fit_spline_stationary():
    s = BotState(10.0, 20.0, 0.3, 0.0, 0.0)
    tr = fit_spline(s, (10.0, 20.0, 1.0), 2.0)
    assert tr.sx.coeffs == pytest.approx([10, 0, 0, 0], abs=1e-12)
    assert tr.sy.coeffs == pytest.approx([20, 0, 0, 0], abs=1e-12)


def test_fit_spline_straight_is_linear():
    s = BotState(85.0, -10.0, math.pi / 2, 15.0, 0.0)
    tr = fit_spline(s, (85.0, -10.0 + 30.0, math.pi / 2), 2.0)
    assert tr.sy.coeffs == pytest.approx([-10, 15, 0, 0], abs=1e-12)
    assert tr.sx.coeffs == pytest.approx([85, 0, 0, 0], abs=1e-12)


def test_sample_grid():
    tr = fit_spline(START, (85.0, 20.0, math.pi / 2), 2.0)
    assert tr.n_steps == 50
    assert tr.times[0] == pytest.approx(0.04)
    assert tr.times[-1] == pytest.approx(2.0)
    assert np.diff(tr.times) == pytest.approx(np.full(49, 0.04))
    assert tr.samples.shape == (50, 2)
    np.testing.assert_allclose(tr.velocities[:, 0], tr.sx.derivative(tr.times))


def test_hermite_matches_linear_solve_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p0, v0, p1, v1 = rng.uniform(-100, 100, 4)
        T_h = rng.uniform(0.2, 8)
        np.testing.assert_allclose(hermite_coeffs(p0, v0, p1, v1, T_h), oracles.cubic_by_solve(p0, v0, p1, v1, T_h), rtol=1e-9, atol=1e-9)


def test_boundary_conditions_over_random_endpoints():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        r = rng.uniform(40, 100)
        s0 = rng.uniform(0, 800)
        x0, y0 = oracles.road_point(85.0, s0, r)
        st_ = BotState(x0, y0, rng.uniform(-10, 10), rng.uniform(0, 22), rng.uniform(-2.8, 2.8))
        roi = build_roi(st_, 2.0, P, T)
        xe, ye = sample_endpoint(roi, rng)
        the = endpoint_heading(xe, ye, T)
        tr = fit_spline(st_, (xe, ye, the), 2.0)
        ve = math.hypot(xe - st_.x, ye - st_.y) / 2.0
        got = [tr.sx(0.0), tr.sy(0.0), tr.sx.derivative(0.0), tr.sy.derivative(0.0),
               tr.sx(2.0), tr.sy(2.0), tr.sx.derivative(2.0), tr.sy.derivative(2.0)]
        want = [st_.x, st_.y, st_.v * math.cos(st_.theta), st_.v * math.sin(st_.theta),
                xe, ye, ve * math.cos(the), ve * math.sin(the)]
        worst = max(worst, max(abs(a - b) for a, b in zip(got, want)))
    assert worst < 1e-9


def test_batched_coeffs_match_single_fit():
    rng = np.random.default_rng(5)
    roi = build_roi(START, 2.0, P, T)
    pts = sample_endpoints(roi, rng, 20)
    th = endpoint_heading(pts[:, 0], pts[:, 1], T)
    cx, cy = spline_coeffs(START, pts[:, 0], pts[:, 1], th, 2.0)
    for i in range(20):
        tr = fit_spline(START, (pts[i, 0], pts[i, 1], th[i]), 2.0)
        np.testing.assert_allclose(cx[i], tr.sx.coeffs)
        np.testing.assert_allclose(cy[i], tr.sy.coeffs)
