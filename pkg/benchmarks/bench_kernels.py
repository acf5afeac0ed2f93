"""Compiled vs pure-Python kernels: raw IMEX steps and a full evolve.

    python3 benchmarks/bench_kernels.py [--nodes 1024] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from semiheat import RunConfig, build_grid, evolve, make_initial_data
from semiheat._core import BACKEND, kernels, pykernels
from semiheat.dynamics import Frame, ImexStepper, StepControls


def bench_step(mod, grid, params, steps, repeat):
    stepper = ImexStepper(grid, Frame.V, params, kernel_module=mod)
    u0, _ = make_initial_data(grid, params.init, params)
    state = np.array(u0.values)
    out = np.empty_like(state)

    def run():
        a, b = state.copy(), out
        for _ in range(steps):
            stepper.step(a, 1e-3, out=b)
            a, b = b, a

    return min(timeit.repeat(run, number=1, repeat=repeat)) / steps


def bench_evolve(mod, grid, params, horizon, repeat):
    u0, _ = make_initial_data(grid, params.init, params)
    ctl = StepControls(horizon=horizon)
    return min(timeit.repeat(lambda: evolve(grid, params, u0, ctl, kernel_module=mod),
                             number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--horizon", type=float, default=1.0)
    args = ap.parse_args()

    cfg = RunConfig(M=args.nodes)
    grid = build_grid(cfg.N, cfg.M, cfg.r_max)
    params = cfg.params
    mods = [("python", pykernels)]
    if BACKEND == "cython":
        mods.insert(0, ("cython", kernels))
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"M={args.nodes}, best of {args.repeat}")
    rows = {}
    for name, mod in mods:
        step = bench_step(mod, grid, params, 200, args.repeat)
        full = bench_evolve(mod, grid, params, args.horizon, max(1, args.repeat // 2))
        rows[name] = (step, full)
        print(f"{name:>7}: {step * 1e6:9.1f} us/step   evolve to s={args.horizon:g}: {full:7.3f} s")
    if len(rows) == 2:
        (cs, cf), (ps, pf) = rows["cython"], rows["python"]
        print(f"speedup: {ps / cs:.1f}x per step, {pf / cf:.1f}x end to end")


if __name__ == "__main__":
    main()
