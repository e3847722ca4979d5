"""Compare the compiled kernel backend against the pure-NumPy fallback.

Micro-benchmarks time each hot kernel (FK chain, EE pose, Jacobian, DLS
solve, collision-proxy distances) from both backend modules in the same
process.  ``--course`` additionally times a full scripted course run per
backend in a subprocess (backend choice is an import-time decision, so
the end-to-end comparison needs a fresh interpreter).

Usage:
    python benchmarks/bench_kernels.py [--reps 2000] [--course]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from quadassist._kernels import pure
from quadassist.model import default_model

try:
    from quadassist._kernels import _core
except ImportError:
    _core = None


def bench(fn, args, reps):
    """Median microseconds per call over ``reps`` calls (5 batches)."""
    batches = []
    per_batch = max(1, reps // 5)
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(per_batch):
            fn(*args)
        batches.append((time.perf_counter() - t0) / per_batch)
    return statistics.median(batches) * 1e6


def kernel_table(reps):
    model = default_model()
    rng = np.random.default_rng(42)
    q = np.concatenate([rng.uniform(-0.5, 0.5, 3),
                        rng.uniform(-1.0, 1.0, 6)])
    backends = [("pure", pure)] + ([("compiled", _core)] if _core else [])

    ref = pure
    R, p, _, _ = ref.chain_frames(model.origins, model.axes, q, model.base_height)
    J = ref.jacobian(model.origins, model.axes, q, model.base_height)
    v = rng.uniform(-0.2, 0.2, 6)
    w = np.array([10.0, 10.0, 10.0, 1, 1, 1, 1, 1, 1], dtype=float)
    segs = ref.proxy_points(R, p, model.proxy_frames, model.proxy_locals)

    cases = [
        ("chain_frames", "chain_frames",
         (model.origins, model.axes, q, model.base_height)),
        ("ee_pose", "ee_pose",
         (model.origins, model.axes, q, model.base_height)),
        ("jacobian", "jacobian",
         (model.origins, model.axes, q, model.base_height)),
        ("dls_rates", "dls_rates", (J, v, w, 0.05)),
        ("proxy_points", "proxy_points",
         (R, p, model.proxy_frames, model.proxy_locals)),
        ("pair_separations", "pair_separations",
         (segs, model.proxy_radii, model.pairs)),
    ]

    width = max(len(name) for name, _, _ in cases)
    header = f"{'kernel':<{width}}" + "".join(
        f"  {name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, attr, args in cases:
        times = [bench(getattr(mod, attr), args, reps) for _, mod in backends]
        row = f"{name:<{width}}" + "".join(f"  {t:>10.2f}us" for t in times)
        if len(times) == 2 and times[1] > 0:
            row += f"  {times[0] / times[1]:>8.1f}x"
        print(row)


def course_time(backend_env):
    code = (
        "import time\n"
        "from quadassist._kernels import KERNEL_BACKEND\n"
        "from quadassist.autopilot import run_course\n"
        "from quadassist.cli import resolve_scenario_path\n"
        "from quadassist.scenario import load_scenario\n"
        "sc = load_scenario(resolve_scenario_path('cybathlon_feb2024'))\n"
        "t0 = time.perf_counter()\n"
        "world = run_course(sc)\n"
        "el = time.perf_counter() - t0\n"
        "assert world.all_tasks_complete()\n"
        "print(f'{KERNEL_BACKEND}: {world.tick} ticks in {el:.2f} s "
        "({world.tick / el:,.0f} ticks/s)')\n"
    )
    env = dict(os.environ)
    env.pop("QUADASSIST_PURE_PY", None)
    env.update(backend_env)
    sys.stdout.flush()
    subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=2000,
                    help="calls per kernel micro-benchmark (default 2000)")
    ap.add_argument("--course", action="store_true",
                    help="also time a full scripted course run per backend")
    args = ap.parse_args()

    if _core is None:
        print("note: compiled backend not built; timing the pure backend only")
    kernel_table(args.reps)

    if args.course:
        print()
        print("full course run (scripted pilot, bundled scenario):")
        course_time({"QUADASSIST_PURE_PY": "1"})
        if _core is not None:
            course_time({})


if __name__ == "__main__":
    main()
