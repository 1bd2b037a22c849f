"""Time the numba and numpy variants of each hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both variants are called directly from ``posefocal.kernels.KERNELS``, so
the environment flag does not matter here. Numba variants are warmed up
once before timing so compilation is excluded.
"""

import argparse
import timeit

import numpy as np

from posefocal import _accel
from posefocal.kernels import KERNELS


def _rotations(rng, n):
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], 1)


def workloads(rng):
    pts = rng.uniform(-0.1, 0.1, (1000, 3))
    R1, R2 = _rotations(rng, 2)
    t1, t2 = np.array([0.01, 0.02, 1.5]), np.array([0.0, -0.01, 1.7])
    a, b = rng.normal(size=(1000, 2)), rng.normal(size=(1000, 2))
    n = 100_000
    f = rng.uniform(200, 1000, n)
    t = np.column_stack([rng.uniform(-0.1, 0.1, (n, 2)), rng.uniform(0.8, 3.0, n)])
    R = _rotations(rng, n)
    upd = (f, t, R, rng.normal(0, 30, (n, 2)), rng.uniform(0.5, 2, n),
           rng.normal(size=(n, 3)), rng.normal(size=(n, 3)), rng.normal(0, 0.3, n), 1e-9)
    return {
        "project_points (1k pts)": ("project_points", (R1, t1, 700.0, 320.0, 240.0, pts)),
        "pose_l1_mean (1k pts)": ("pose_l1_mean", (R1, t1, R2, t2, pts)),
        "pose_l2_mean (1k pts)": ("pose_l2_mean", (R1, t1, R2, t2, pts)),
        "rows_l1_sum (1k rows)": ("rows_l1_sum", (a, b)),
        "apply_update_batch (100k)": ("apply_update_batch", upd),
        "ideal_update_batch (100k)": ("ideal_update_batch", (f, t, R, f[::-1].copy(), t[::-1].copy(), R[::-1].copy())),
    }


def best_time(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {_accel.HAS_NUMBA}")
    print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for label, (name, kargs) in workloads(rng).items():
        np_impl, nb_impl = KERNELS[name]
        t_np = best_time(np_impl, kargs, args.repeat)
        if _accel.HAS_NUMBA:
            nb_impl(*kargs)
            t_nb = best_time(nb_impl, kargs, args.repeat)
            print(f"{label:<28}{t_np * 1e6:>10.1f}us{t_nb * 1e6:>10.1f}us{t_np / t_nb:>9.1f}x")
        else:
            print(f"{label:<28}{t_np * 1e6:>10.1f}us{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
