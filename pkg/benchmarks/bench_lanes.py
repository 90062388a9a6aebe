"""Benchmark the compiled walk kernel against the numpy fallback.

Usage: python benchmarks/bench_lanes.py [--reps 2000] [--t 10] [--dt 1e-3]

Times the full non-explosion estimator (draws + walk) under each lane and
the walk kernel alone on a fixed grid, and checks the lanes agree.
"""

import argparse
import time

import numpy as np

from parabranch import _pathops
from parabranch._rng import stream
from parabranch.classify import ModelParams, StableJumpParams
from parabranch.kernels import Uniform
from parabranch import spine

try:
    from parabranch import _core
except ImportError:
    _core = None


def time_walk(impl, dt, cont, jump, rec, loops=50):
    best = float("inf")
    for _ in range(loops):
        t0 = time.perf_counter()
        impl.walk_levy(dt, cont, jump, -0.5, rec)
        best = min(best, time.perf_counter() - t0)
    return best


def time_estimator(walk_fn, args):
    spine_mod = spine
    old = spine_mod.walk_levy
    spine_mod.walk_levy = walk_fn
    try:
        params = ModelParams(g=1.0, sigma=0.3, r=1.0, q=0.0)
        st = StableJumpParams(b=-0.5, c=-1.0)
        cfg = spine.SpineConfig(t_max=args.t, reps=args.reps, seed=42, dt=args.dt)
        t0 = time.perf_counter()
        est, se = spine.nonexplosion_probability(params, Uniform(), st, args.t, 1.0, cfg)
        return time.perf_counter() - t0, est, se
    finally:
        spine_mod.walk_levy = old


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--t", type=float, default=10.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()

    n = int(args.t / args.dt)
    rng = stream(7, 0)
    dt = np.full(n, args.dt)
    cont = rng.standard_normal(n) * 0.02
    jump = np.where(rng.random(n) < 0.01, -0.7, 0.0)
    rec = np.array([n // 2, n], dtype=np.int64)

    print(f"walk kernel, {n} grid points:")
    t_py = time_walk(_pathops, dt, cont, jump, rec)
    print(f"  python   {t_py * 1e3:8.3f} ms")
    if _core is not None:
        t_c = time_walk(_core, dt, cont, jump, rec)
        print(f"  compiled {t_c * 1e3:8.3f} ms   ({t_py / t_c:.1f}x)")
        a = _pathops.walk_levy(dt, cont, jump, -0.5, rec)
        b = _core.walk_levy(dt, cont, jump, -0.5, rec)
        assert np.allclose(a[1], b[1], rtol=1e-12)
        print("  lanes agree to 1e-12")
    else:
        print("  compiled lane not built")

    print(f"\nnon-explosion estimator, reps={args.reps}, t={args.t}, dt={args.dt}:")
    t_est_py, est_py, se_py = time_estimator(_pathops.walk_levy, args)
    print(f"  python   {t_est_py:8.3f} s   estimate {est_py:.5f} +- {se_py:.5f}")
    if _core is not None:
        t_est_c, est_c, se_c = time_estimator(_core.walk_levy, args)
        print(f"  compiled {t_est_c:8.3f} s   estimate {est_c:.5f} +- {se_c:.5f}"
              f"   ({t_est_py / t_est_c:.1f}x)")


if __name__ == "__main__":
    main()
