#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the hot kernels individually plus one closed-loop control step for each
robot, and prints a comparison table. Run after installing:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from pflsim import _core_py
from pflsim.robot import load_robot

try:
    from pflsim import _core
except ImportError:
    _core = None


def _time(fn, args, repeats, min_time=0.2):
    fn(*args)  # warm up
    n = repeats
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn(*args)
        elapsed = time.perf_counter() - t0
        if elapsed > min_time:
            return elapsed / n
        n *= 4


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    l = np.array([2.0, 2.0, 2.0])
    m = np.array([8.0, 5.0, 5.0])
    iv = m * l**2 / 3.0
    q3 = rng.uniform(-1, 1, 3)
    qd3 = rng.uniform(-1, 1, 3)
    panda = load_robot("panda")
    q7 = rng.uniform(-1, 1, 7)
    qd7 = rng.uniform(-1, 1, 7)
    margs = (panda.dh, panda.flange, panda.masses, panda.coms, panda.inertias)

    cases = [
        ("p3r_mass", (l, m, iv, q3)),
        ("p3r_coriolis", (l, m, q3, qd3)),
        ("p3r_jac", (l, q3)),
        ("mdh_frames", (panda.dh, panda.flange, q7)),
        ("mdh_jac_geo", (panda.dh, panda.flange, q7)),
        ("mdh_rnea", (*margs, q7, qd7, qd7, panda.gravity_accel)),
        ("mdh_bias", (*margs, q7, qd7, panda.gravity_accel)),
        ("mdh_mass", (*margs, q7)),
    ]
    rows = []
    for name, args in cases:
        t_py = _time(getattr(_core_py, name), args, repeats)
        if _core is not None:
            t_cy = _time(getattr(_core, name), args, repeats)
            rows.append((name, t_py * 1e6, t_cy * 1e6, t_py / t_cy))
        else:
            rows.append((name, t_py * 1e6, float("nan"), float("nan")))
    return rows


def bench_simulation_step():
    """One full closed-loop step per robot on the active backend."""
    from pflsim.simulator import run, scenario_from_dict
    import json
    from importlib import resources

    out = []
    for name, steps in (("3r_imp2", 2000), ("panda_imp2", 500)):
        doc = json.loads(resources.files("pflsim").joinpath(f"scenarios/{name}.json").read_text())
        doc["t_max"] = steps * doc["dt"]
        scenario = scenario_from_dict(doc)
        t0 = time.perf_counter()
        run(scenario)
        per_step = (time.perf_counter() - t0) / steps
        out.append((name, per_step * 1e6))
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    from pflsim import backend_name

    print(f"active backend: {backend_name()}")
    print(f"compiled core available: {_core is not None}\n")
    rows = bench_kernels(args.repeats)
    print(f"{'kernel':<14} {'python us':>12} {'cython us':>12} {'speedup':>9}")
    for name, t_py, t_cy, speedup in rows:
        cy = f"{t_cy:12.2f}" if np.isfinite(t_cy) else "         n/a"
        sp = f"{speedup:8.1f}x" if np.isfinite(speedup) else "      n/a"
        print(f"{name:<14} {t_py:12.2f} {cy} {sp}")
    print()
    for name, per_step in bench_simulation_step():
        print(f"closed-loop step ({name}): {per_step:.0f} us on the active backend")


if __name__ == "__main__":
    main()
