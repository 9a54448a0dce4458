"""Compiled rollout kernels. Loop over rollouts in ``prange``; each rollout
writes only its own output slot, so results do not depend on scheduling."""
import math

import numpy as np

from ._accel import njit, prange


@njit(cache=True, nogil=True)
def _running_cost(x, y, v, frames_k, cv):
    half = cv[0]
    z = 0.0
    if abs(y) >= half:
        z = y - half if y > 0.0 else y + half
    r = math.sqrt(x * x + z * z)
    a = r - cv[3]
    b = r - cv[4]
    c = cv[5] * a * a * b * b
    if r < cv[1] or r > cv[2]:
        c += cv[6]
    dv = v - cv[8]
    c += cv[7] * dv * dv
    for i in range(frames_k.shape[0]):
        dx = frames_k[i, 0] - x
        dy = frames_k[i, 1] - y
        ca = frames_k[i, 2]
        sa = frames_k[i, 3]
        if abs(ca * dx + sa * dy) < cv[10] and abs(sa * dx - ca * dy) < cv[11]:
            c += cv[9]
    return c


@njit(cache=True, parallel=True)
def rollout_costs(x0, inputs, dyn, frames, cv):
    m_count = inputs.shape[0]
    n_steps = inputs.shape[1]
    dt = dyn[0]
    adt = dyn[1] * dt
    vmax = dyn[2]
    wmax = dyn[3]
    out = np.empty(m_count)
    for m in prange(m_count):
        x = x0[0]
        y = x0[1]
        th = x0[2]
        v = x0[3]
        w = x0[4]
        total = 0.0
        for k in range(n_steps):
            nx = x + v * math.cos(th) * dt
            ny = y + v * math.sin(th) * dt
            th = th + w * dt
            nv = v + adt * (inputs[m, k, 0] - v)
            nw = w + adt * (inputs[m, k, 1] - w)
            if abs(nv) > vmax:
                nv = vmax if nv > 0.0 else -vmax
            if abs(nw) > wmax:
                nw = wmax if nw > 0.0 else -wmax
            x = nx
            y = ny
            v = nv
            w = nw
            total += _running_cost(x, y, v, frames[k], cv)
        out[m] = total
    return out


@njit(cache=True, parallel=True)
def rollout_states(x0, inputs, dyn):
    m_count = inputs.shape[0]
    n_steps = inputs.shape[1]
    dt = dyn[0]
    adt = dyn[1] * dt
    vmax = dyn[2]
    wmax = dyn[3]
    out = np.empty((m_count, n_steps, 5))
    for m in prange(m_count):
        x = x0[0]
        y = x0[1]
        th = x0[2]
        v = x0[3]
        w = x0[4]
        for k in range(n_steps):
            nx = x + v * math.cos(th) * dt
            ny = y + v * math.sin(th) * dt
            th = th + w * dt
            nv = v + adt * (inputs[m, k, 0] - v)
            nw = w + adt * (inputs[m, k, 1] - w)
            if abs(nv) > vmax:
                nv = vmax if nv > 0.0 else -vmax
            if abs(nw) > wmax:
                nw = wmax if nw > 0.0 else -wmax
            x = nx
            y = ny
            v = nv
            w = nw
            out[m, k, 0] = x
            out[m, k, 1] = y
            out[m, k, 2] = th
            out[m, k, 3] = v
            out[m, k, 4] = w
    return out


@njit(cache=True, parallel=True)
def path_costs(xy, speed, frames, cv):
    m_count = xy.shape[0]
    n_steps = xy.shape[1]
    out = np.empty(m_count)
    for m in prange(m_count):
        total = 0.0
        for k in range(n_steps):
            total += _running_cost(xy[m, k, 0], xy[m, k, 1], speed[m, k], frames[k], cv)
        out[m] = total
    return out
