"""Compare the compiled and pure-Python Euler kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--solves 5]

Prints the per-call time of each kernel for both backends and the
speed-up, followed by the wall time of a forward Riemann solve.
"""

import argparse
import sys
import timeit

import numpy as np

from selfsim.kernels import compiled_backend, python_backend
from selfsim.pencil import background
from selfsim.riemann import forward_endpoint, solve_forward
from selfsim.systems import EulerSystem

GAMMA = 1.4


def kernel_cases(system):
    bg = background(system)
    u = system.background + np.array([2e-4, -1e-4, 3e-4, 1e-4])
    us = system.random_states(1000, np.random.default_rng(0))
    ref = bg.references[2][:, 0].copy()
    lbar = bg.structure.groups[2].left[0].copy()
    ref2 = bg.references[1].copy()
    rows = bg.structure.groups[1].left.copy()
    return {
        "flux": lambda k: k.flux(u, GAMMA, 0),
        "jacobians": lambda k: k.jacobians(u, GAMMA),
        "entropy_hess": lambda k: k.entropy_hess(u, GAMMA),
        "lambdas": lambda k: k.lambdas(u, GAMMA),
        "gnl_field": lambda k: k.gnl_field(u, GAMMA, 2, ref, lbar),
        "leaf_field": lambda k: k.leaf_field(u, GAMMA, 1, ref2, rows, 0, 2.0),
        "flux_batch[1000]": lambda k: k.flux_batch(us, GAMMA, 0),
        "jacobians_batch[1000]": lambda k: k.jacobians_batch(us, GAMMA),
    }


def per_call(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def solve_time(kernels, solves):
    system = EulerSystem(kernels=kernels)
    ub = system.background
    ur = forward_endpoint(system, ub, np.array([-2e-4, 1e-4, -5e-5, 2e-4]))
    solve_forward(system, ub, ur)
    return min(timeit.repeat(lambda: solve_forward(system, ub, ur), repeat=solves, number=1))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--solves", type=int, default=5)
    args = parser.parse_args(argv)
    if compiled_backend is None:
        print("compiled extension not available; build it with `pip install -e .`",
              file=sys.stderr)
        return 1
    cases = kernel_cases(EulerSystem())
    print(f"{'kernel':<24}{'compiled':>12}{'python':>12}{'speed-up':>10}")
    for name, fn in cases.items():
        tc = per_call(lambda: fn(compiled_backend), args.repeat)
        tp = per_call(lambda: fn(python_backend), args.repeat)
        print(f"{name:<24}{tc * 1e6:>10.2f}us{tp * 1e6:>10.2f}us{tp / tc:>9.1f}x")
    tc = solve_time(compiled_backend, args.solves)
    tp = solve_time(python_backend, args.solves)
    print(f"{'solve_forward':<24}{tc * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
