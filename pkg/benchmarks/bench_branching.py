"""Timing comparison of the compiled and interpreted simulation kernels.

Usage: python3 benchmarks/bench_branching.py [--reps N] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

from nudgesim import (
    CascadeConfig,
    CommentFactors,
    integrate_ode,
    set_backend,
    simulate_many,
)
from nudgesim._kernels import HAS_NUMBA


def time_best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=200, help="cascade replications")
    parser.add_argument("--steps", type=int, default=500, help="events per cascade")
    parser.add_argument("--repeat", type=int, default=3, help="timing repeats")
    args = parser.parse_args()

    config = CascadeConfig(
        n0=50, p0=50, friend_mean=50.0, share_prob=0.5, steps=args.steps
    )
    factors = CommentFactors.from_belief(0.9)
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    print(f"cascades: {args.reps} replications x {args.steps} events")

    cascade_times: dict[str, float] = {}
    ode_times: dict[str, float] = {}
    for name in backends:
        set_backend(name)
        simulate_many(config, factors, 2, seed=0)  # warm-up / JIT compile
        integrate_ode(100.0, 50.0, factors, 25.0, horizon=1.0)
        cascade_times[name] = time_best(
            lambda: simulate_many(config, factors, args.reps, seed=1), args.repeat
        )
        ode_times[name] = time_best(
            lambda: [
                integrate_ode(100.0, 50.0, factors, 25.0) for _ in range(20)
            ],
            args.repeat,
        )
        events = args.reps * args.steps
        print(
            f"  {name:>5}: cascades {cascade_times[name]:8.4f} s "
            f"({events / cascade_times[name]:>12,.0f} events/s), "
            f"20 integrations {ode_times[name]:8.4f} s"
        )
    set_backend(None)

    if len(backends) == 2:
        print(
            f"speedup (numpy/numba): cascades "
            f"{cascade_times['numpy'] / cascade_times['numba']:.1f}x, "
            f"integration {ode_times['numpy'] / ode_times['numba']:.1f}x"
        )


if __name__ == "__main__":
    main()
