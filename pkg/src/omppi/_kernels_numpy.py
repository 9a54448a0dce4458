"""Vectorised numpy versions of the rollout kernels (rollouts along axis 0)."""
import numpy as np


def _running_cost(x, y, v, frames_k, cv):
    half = cv[0]
    z = np.where(np.abs(y) >= half, y - half * np.sign(y), 0.0)
    r = np.sqrt(x * x + z * z)
    c = cv[5] * (r - cv[3]) ** 2 * (r - cv[4]) ** 2
    c = c + np.where((r < cv[1]) | (r > cv[2]), cv[6], 0.0)
    c = c + cv[7] * (v - cv[8]) ** 2
    for xa, ya, ca, sa in frames_k:
        dx = xa - x
        dy = ya - y
        hit = (np.abs(ca * dx + sa * dy) < cv[10]) & (np.abs(sa * dx - ca * dy) < cv[11])
        c = c + np.where(hit, cv[9], 0.0)
    return c


def _advance(x, y, th, v, w, vd, wd, dyn):
    dt, alpha, vmax, wmax = dyn
    adt = alpha * dt
    nx = x + v * np.cos(th) * dt
    ny = y + v * np.sin(th) * dt
    nth = th + w * dt
    nv = np.clip(v + adt * (vd - v), -vmax, vmax)
    nw = np.clip(w + adt * (wd - w), -wmax, wmax)
    return nx, ny, nth, nv, nw


def rollout_costs(x0, inputs, dyn, frames, cv):
    m_count, n_steps = inputs.shape[:2]
    x, y, th, v, w = (np.full(m_count, float(a)) for a in x0)
    total = np.zeros(m_count)
    for k in range(n_steps):
        x, y, th, v, w = _advance(x, y, th, v, w, inputs[:, k, 0], inputs[:, k, 1], dyn)
        total += _running_cost(x, y, v, frames[k], cv)
    return total


def rollout_states(x0, inputs, dyn):
    m_count, n_steps = inputs.shape[:2]
    x, y, th, v, w = (np.full(m_count, float(a)) for a in x0)
    out = np.empty((m_count, n_steps, 5))
    for k in range(n_steps):
        x, y, th, v, w = _advance(x, y, th, v, w, inputs[:, k, 0], inputs[:, k, 1], dyn)
        out[:, k, 0] = x
        out[:, k, 1] = y
        out[:, k, 2] = th
        out[:, k, 3] = v
        out[:, k, 4] = w
    return out


def path_costs(xy, speed, frames, cv):
    total = np.zeros(xy.shape[0])
    for k in range(xy.shape[1]):
        total += _running_cost(xy[:, k, 0], xy[:, k, 1], speed[:, k], frames[k], cv)
    return total
