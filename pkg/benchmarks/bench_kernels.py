"""Time the numba kernels against the numpy fallback on generation-sized inputs.

    python3 benchmarks/bench_kernels.py [--p 256] [--repeat 5]
"""
import argparse
import time
import warnings

import numpy as np

warnings.filterwarnings("ignore", module="numba")

from lexqd.kernels import get_backend  # noqa: E402
from lexqd.maze import load_map  # noqa: E402


def cases(p, gen):
    maze = load_map()
    moves = gen.integers(0, 8, size=(p, 63)).astype(np.int64)
    pos = gen.uniform(0, 1, size=(p, 250, 2))
    reward = gen.normal(size=(p, 250))
    length = np.full(p, 250, dtype=np.int64)
    unit = np.array([0.0, 0.0, 1.0, 1.0])
    m = gen.integers(0, 3, size=(p, 64)).astype(np.float64)
    perms = gen.permuted(np.tile(np.arange(64, dtype=np.int64), (p, 1)), axis=1)
    u = gen.random(p)
    weights = gen.normal(size=(p, 66))
    maze_args = (8, maze.walls, maze.ray_segments, np.asarray(maze.bounds, dtype=np.float64),
                 np.asarray(maze.start, dtype=np.float64), np.asarray(maze.goal, dtype=np.float64),
                 0.015, 0.2, 0.025, 0, 250)
    return {
        "knight_tours": lambda k: k.knight_tours(moves),
        "space_subagg (n=64)": lambda k: k.space_subagg(pos, reward, length, unit, 8),
        "time_subagg (n=64)": lambda k: k.time_subagg(reward, length, 64),
        "lexicase_select (n=64)": lambda k: k.lexicase_select(m, perms, u, 0.0),
        "maze_rollouts (T=250)": lambda k: k.maze_rollouts(weights, *maze_args),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=256, help="population size")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {name: get_backend(name) for name in ("numba", "numpy")}
    table = cases(args.p, np.random.default_rng(0))
    print(f"{'kernel':26s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for label, call in table.items():
        call(backends["numba"])  # compile / load from cache
        t_nb = best_time(lambda: call(backends["numba"]), args.repeat)
        t_np = best_time(lambda: call(backends["numpy"]), args.repeat)
        print(f"{label:26s} {t_nb * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
