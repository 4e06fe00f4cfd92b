"""Compare the compiled and pure-Python RK4 kernels.

Run ``python benchmarks/bench_kernels.py``. Kernel timings import both
modules directly; the closed-loop timing runs a shipped scenario in a
subprocess per backend (selected by ``TORPEDO_SMC_PURE_PYTHON``).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from torpedo_smc import _pykernels
from torpedo_smc.lti import tf_to_ss
from torpedo_smc.plant import IMMERSION_TF

try:
    from torpedo_smc import _ckernels
except ImportError:
    _ckernels = None

CLOSED_LOOP = (
    "import time; from torpedo_smc.scenario import load_scenario; from torpedo_smc.sim import run_closed_loop;"
    "sc = load_scenario('{name}'); t = time.perf_counter(); run_closed_loop(sc); print(time.perf_counter() - t)"
)


def bench_kernels(repeat):
    A = np.ascontiguousarray(tf_to_ss(IMMERSION_TF).A)
    x = np.array([1e-4, -2e-4, 3e-3, 0.1])
    c = np.array([0.0, 0.0, 0.0, 0.01])
    c_seq = np.ascontiguousarray(np.tile(c, (10000, 1)))
    rows = []
    for label, mod in (("python", _pykernels), ("cython", _ckernels)):
        if mod is None:
            continue
        step = min(timeit.repeat(lambda: mod.rk4_affine(A, x, c, 1e-3), number=20000, repeat=repeat)) / 20000
        traj = min(timeit.repeat(lambda: mod.rk4_affine_trajectory(A, x, c_seq, 1e-3), number=1, repeat=repeat))
        rows.append((label, step * 1e6, traj * 1e3))
    return rows


def bench_closed_loop(name, repeat):
    out = {}
    for label, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, TORPEDO_SMC_PURE_PYTHON=flag)
        times = []
        for _ in range(repeat):
            res = subprocess.run([sys.executable, "-c", CLOSED_LOOP.format(name=name)], env=env,
                                 capture_output=True, text=True, check=True)
            times.append(float(res.stdout))
        out[label] = min(times)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scenario", default="default_smc1_depth")
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'backend':<8} {'rk4 step [us]':>14} {'10k-step traj [ms]':>19}")
    rows = bench_kernels(args.repeat)
    for label, step, traj in rows:
        print(f"{label:<8} {step:>14.3f} {traj:>19.3f}")
    if len(rows) == 2:
        print(f"speedup  {rows[0][1] / rows[1][1]:>14.1f}x {rows[0][2] / rows[1][2]:>18.1f}x")

    cl = bench_closed_loop(args.scenario, max(1, args.repeat // 2))
    print(f"\nclosed loop '{args.scenario}' (10001 samples):")
    for label, t in cl.items():
        print(f"  {label:<8} {t:.3f} s")
    print(f"  speedup  {cl['python'] / cl['cython']:.2f}x")


if __name__ == "__main__":
    main()
