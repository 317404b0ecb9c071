#!/usr/bin/env python3
"""Benchmark: compiled RK4 reference kernels vs the pure-Python fallback.

Times the two backends on the same workloads and prints one CSV row per
(kernel, substeps) pair with the per-call time and the speedup of the
compiled path. The generic eval-loop reference (used for non-synthetic
models) is included as a baseline for scale.

Usage:
    python benchmarks/bench_kernels.py [--substeps 10000,100000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from scire import NoiseSchedule, SyntheticModel, _pykernels
from scire.oracle import _solve_generic
from scire.models import SyntheticEpsModel

try:
    from scire import _ckernels
except ImportError:
    _ckernels = None


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--substeps", default="10000,100000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    substeps = [int(s) for s in args.substeps.split(",")]

    schedule = NoiseSchedule.linear()
    tau0 = schedule.nsr(1.0)
    tau1 = schedule.nsr(1e-3)
    coeffs = np.tile(np.array([1.0, 1.0, 1.0, 1.0])[:, None], (1, 4))
    y0 = np.ones(4)

    workloads = {
        "rk4_poly": lambda mod, n: mod.rk4_poly(coeffs, y0, tau0, tau1, n),
        "rk4_linear_state": lambda mod, n: mod.rk4_linear_state(
            0.5, y0, tau0, tau1, n),
    }

    print("kernel,substeps,python_s,compiled_s,speedup")
    for name, call in workloads.items():
        for n in substeps:
            t_py = best_of(args.repeat, lambda: call(_pykernels, n))
            if _ckernels is not None:
                t_c = best_of(args.repeat, lambda: call(_ckernels, n))
                rel = np.max(np.abs(call(_ckernels, n) - call(_pykernels, n)))
                assert rel < 1e-9, f"backend mismatch {rel}"
                print(f"{name},{n},{t_py:.6f},{t_c:.6f},{t_py / t_c:.2f}")
            else:
                print(f"{name},{n},{t_py:.6f},,"
                      f"  # compiled backend not built")

    # generic Python eval loop, for scale (same model via the slow path)
    model = SyntheticEpsModel(
        SyntheticModel.tau_poly([1.0, 1.0, 1.0, 1.0], dim=4), schedule)
    for n in substeps:
        t_gen = best_of(max(1, args.repeat // 2),
                        lambda: _solve_generic(model, schedule, y0,
                                               tau0, tau1, n))
        print(f"generic_eval_loop,{n},{t_gen:.6f},,")


if __name__ == "__main__":
    main()
