"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--step 1] [--events 200000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from chbell import _kernels, make_state
from chbell.prediction import coincidence_grid, scan_angles, singles_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--step", type=float, default=1.0)
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    s = make_state(0.4)
    ang = scan_angles(args.step)
    p = coincidence_grid(s, ang, ang)
    single = singles_grid(s, ang)
    grid_args = (p, p, p, p, single, single, 1e-12)

    rng = np.random.default_rng(0)
    t1 = np.sort(rng.integers(0, 10**10, args.events))
    t2 = np.sort(np.concatenate([t1[::2] + 3, rng.integers(0, 10**10, args.events // 2)]))

    impls = _kernels.implementations()
    for name, fns in impls.items():
        # first call compiles (or loads the cache)
        fns[0](*grid_args)
        fns[1](*grid_args)
        fns[2](t1[:10], t2[:10], 0, 0, 10.0)

    print(f"grid {len(ang)}^4 points, {args.events} events per channel, best of {args.repeat}")
    print(f"{'kernel':<12}" + "".join(f"{n:>12}" for n in impls) + "     speedup")
    checks = []
    for k, label in enumerate(("best_ch", "best_ratio", "match_heads")):
        row, outs = [], []
        for fns in impls.values():
            if k < 2:
                dt, out = best_of(lambda: fns[k](*grid_args), args.repeat)
            else:
                dt, out = best_of(lambda: fns[k](t1, t2, 0, 0, 10.0), args.repeat)
            row.append(dt)
            outs.append(out)
        key = (lambda o: o[1:]) if k < 2 else (lambda o: o)
        checks.append(all(key(o) == key(outs[0]) for o in outs))
        speed = f"{row[0] / row[-1]:10.1f}x" if len(row) > 1 else "         -"
        print(f"{label:<12}" + "".join(f"{t * 1e3:10.1f}ms" for t in row) + speed)
    print("results agree" if all(checks) else "RESULTS DIFFER")


if __name__ == "__main__":
    main()
