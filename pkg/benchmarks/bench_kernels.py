"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 40] [--horizon 60]

Also times a full G6 search with each backend, since that is where the
kernels matter in practice.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from pjp import _kernels_py

try:
    from pjp import _kernels
except ImportError:
    _kernels = None

CASES = ("static_series", "poly1_series", "linreg_series", "dom_poly1_series",
         "poly2_series", "power_series")


def make_points(rng, m):
    ts = sorted(rng.sample(range(3 * m), m))
    return ts, [rng.uniform(-10, 10) for _ in ts]


def bench_kernels(repeat, m, n):
    rng = random.Random(0)
    data = [make_points(rng, m) for _ in range(50)]
    rows = []
    for name in CASES:
        times = {}
        for label, mod in (("python", _kernels_py), ("compiled", _kernels)):
            if mod is None:
                continue
            fn = getattr(mod, name)
            t = min(timeit.repeat(lambda: [fn(ts, ys, n) for ts, ys in data],
                                  number=20, repeat=repeat))
            times[label] = t / (20 * len(data)) * 1e6
        rows.append((name, times))
    return rows


def bench_search(instance):
    code = ("import time; from pjp.domain import load_instance; from pjp.planner import bfs_solve;"
            "from pjp.kernels import BACKEND; import pjp, os;"
            f"d = os.path.join(os.path.dirname(pjp.__file__), 'fixtures', {instance!r});"
            "i = load_instance(d + '/domain.pddl', d + '/problem.pddl');"
            "t = time.perf_counter(); r = bfs_solve(i);"
            "print(BACKEND, r.metrics.generated, round(time.perf_counter() - t, 3))")
    out = {}
    for pure in (False, True):
        env = dict(os.environ)
        env.pop("PJP_PURE_PYTHON", None)
        if pure:
            env["PJP_PURE_PYTHON"] = "1"
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        backend, gen, secs = res.stdout.split()
        out[backend] = (int(gen), float(secs))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--horizon", type=int, default=60)
    ap.add_argument("--instance", default="g6")
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the Python backend is timed")
    print(f"{'kernel':<18}{'python us':>12}{'compiled us':>14}{'speedup':>10}")
    for name, times in bench_kernels(args.repeat, args.points, args.horizon):
        py, c = times["python"], times.get("compiled")
        if c is None:
            print(f"{name:<18}{py:>12.2f}{'-':>14}{'-':>10}")
        else:
            print(f"{name:<18}{py:>12.2f}{c:>14.2f}{py / c:>9.1f}x")
    print()
    for backend, (gen, secs) in bench_search(args.instance).items():
        print(f"search {args.instance} [{backend}]: {gen} generated in {secs:.2f} s")


if __name__ == "__main__":
    main()
