"""Compare the numba and pure-numpy rollout kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 50x50,1000x200,2000x200]

Each size is M rollouts x N steps against one obstacle. Inputs are identical
for both backends; the script also reports the largest relative cost
difference between them.
"""
import argparse
import math
import time

import numpy as np

from omppi import kernels
from omppi._kernels_numpy import rollout_costs as numpy_costs
from omppi._accel import HAVE_NUMBA, get_num_threads
from omppi.controller import TaskModel
from omppi.dynamics import BotState, ObstacleState
from omppi.track import LaneId


def parse_sizes(text):
    return [tuple(int(v) for v in item.split("x")) for item in text.split(",")]


def best_time(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=parse_sizes, default=parse_sizes("50x50,1000x200,2000x200"))
    args = ap.parse_args(argv)

    model = TaskModel()
    x0 = BotState(85.0, -10.0, math.pi / 2, 15.0, 0.0).as_array()
    obstacles = [ObstacleState(LaneId.OUTER, 50.0, 10.0)]
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}; threads: {get_num_threads()}")
    print(f"{'M x N':>12} {'numpy ms':>10} {'numba ms':>10} {'speed-up':>9} {'ns/step':>8} {'max rel diff':>13}")
    for m, n in args.sizes:
        inputs = np.array([15.0, 0.0]) + rng.standard_normal((m, n, 2)) * [2.0, 1.0]
        frames = model.agent_frames(obstacles, n)
        t_np = best_time(lambda: numpy_costs(x0, inputs, model.dyn_vector, frames, model.cost_vector), args.repeat)
        ref = numpy_costs(x0, inputs, model.dyn_vector, frames, model.cost_vector)
        if HAVE_NUMBA:
            from omppi._kernels_numba import rollout_costs as numba_costs

            t_nb = best_time(lambda: numba_costs(x0, inputs, model.dyn_vector, frames, model.cost_vector), args.repeat)
            got = numba_costs(x0, inputs, model.dyn_vector, frames, model.cost_vector)
            diff = float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1.0)))
            print(f"{m:>6} x {n:<4} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:9.1f} "
                  f"{t_nb * 1e9 / (m * n):8.1f} {diff:13.2e}")
        else:
            print(f"{m:>6} x {n:<4} {t_np * 1e3:10.2f} {'-':>10} {'-':>9} {'-':>8} {'-':>13}")
    print(f"active backend for controllers: {kernels.backend()}")


if __name__ == "__main__":
    main()
