"""Slow, independent reference implementations used by the tests.

Written from the model definitions with plain ``math`` and explicit
branching; nothing here imports the package, so agreement is evidence
rather than tautology.
"""
import math

import numpy as np

LW, SL, IR = 30.0, 150.0, 40.0
HALF = SL / 2
R_IN, R_OUT = IR + LW / 2, IR + 1.5 * LW
DT, ALPHA, VMAX, WMAX = 0.04, 4.0 / 0.35, 22.0, 2.8


def capsule(x, y):
    z = 0.0 if abs(y) < HALF else y - HALF * math.copysign(1.0, y)
    return math.sqrt(x * x + z * z), z


def lane_xy(radius, s):
    """Walk the four segments explicitly: right straight (from y=0 up),
    top arc, left straight (down), bottom arc, right straight (up to y=0)."""
    per = 2 * SL + 2 * math.pi * radius
    s = s % per
    if s < HALF:
        return radius, s, math.pi / 2
    s -= HALF
    arc = math.pi * radius
    if s < arc:
        a = s / radius
        return radius * math.cos(a), HALF + radius * math.sin(a), math.pi / 2 + a
    s -= arc
    if s < SL:
        return -radius, HALF - s, -math.pi / 2
    s -= SL
    if s < arc:
        a = math.pi + s / radius
        return radius * math.cos(a), -HALF + radius * math.sin(a), a + math.pi / 2 - 2 * math.pi
    s -= arc
    return radius, -HALF + s, math.pi / 2


def nearest_station(x, y, radius, n=200_000):
    """Brute-force nearest centreline point on a dense arc-length grid."""
    per = 2 * SL + 2 * math.pi * radius
    best, best_s = float("inf"), 0.0
    for i in range(n):
        s = per * i / n
        px, py, _ = lane_xy(radius, s)
        d = (px - x) ** 2 + (py - y) ** 2
        if d < best:
            best, best_s = d, s
    return best_s


def euler_step(state, u):
    x, y, th, v, w = state
    vd, wd = u
    nv = v + ALPHA * (vd - v) * DT
    nw = w + ALPHA * (wd - w) * DT
    nv = max(-VMAX, min(VMAX, nv))
    nw = max(-WMAX, min(WMAX, nw))
    return (x + v * math.cos(th) * DT, y + v * math.sin(th) * DT, th + w * DT, nv, nw)


def running_cost(x, y, v, agents):
    r, _ = capsule(x, y)
    c = 0.001 * (r - 55) ** 2 * (r - 85) ** 2
    if r < 40 or r > 100:
        c += 600
    c += 0.4 * (v - 20) ** 2
    for xa, ya, tha in agents:
        dx, dy = xa - x, ya - y
        pf = abs(math.cos(tha) * dx + math.sin(tha) * dy)
        pl = abs(math.cos(tha - math.pi / 2) * dx + math.sin(tha - math.pi / 2) * dy)
        if pf < 0.5 * 63 + 10.5 and pl < 0.5 * 30:
            c += 500
    return c


def cubic_by_solve(p0, v0, p1, v1, T):
    """Coefficients a0..a3 from the 4x4 boundary-value system."""
    A = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [1, T, T**2, T**3],
            [0, 1, 2 * T, 3 * T**2],
        ],
        dtype=float,
    )
    return np.linalg.solve(A, np.array([p0, v0, p1, v1], dtype=float))


def inverse_loop(xd, yd, theta0, omega0):
    """Scalar loop version of the planned-kinematics and inverse-input rules."""
    n1 = len(xd)
    v = [math.hypot(xd[j], yd[j]) for j in range(n1)]
    th = []
    prev = theta0
    for j in range(n1):
        if v[j] > 1e-9:
            raw = math.atan2(yd[j], xd[j])
            d = (raw - prev + math.pi) % (2 * math.pi) - math.pi
            if d == -math.pi:
                d = math.pi
            prev = prev + d
        th.append(prev)
    om = [omega0] + [(th[j] - th[j - 1]) / DT for j in range(1, n1)]
    adt = ALPHA * DT
    inputs = [((v[j + 1] - v[j]) / adt + v[j], (om[j + 1] - om[j]) / adt + om[j]) for j in range(n1 - 1)]
    return v, th, om, inputs


def softmin(costs, lam):
    b = min(costs)
    e = [math.exp(-(c - b) / lam) for c in costs]
    s = math.fsum(e)
    return [x / s for x in e]


def road_point(ref_radius, s, radius):
    """Point at capsule radius ``radius`` on the normal through arc length
    ``s`` of the reference curve."""
    x, y, th = lane_xy(ref_radius, s)
    # Outward normal is the travel direction rotated clockwise.
    nx, ny = math.sin(th), -math.cos(th)
    return x + (radius - ref_radius) * nx, y + (radius - ref_radius) * ny
