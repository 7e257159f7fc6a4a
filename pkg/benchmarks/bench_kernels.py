#!/usr/bin/env python3
"""Benchmark the compiled series kernels against the pure-Python fallback.

The truncated Cauchy product is the hot inner loop of the whole library
(every connection/curvature entry is a sum of series products), so this is
the loop the optional Cython extension accelerates.  Run:

    python benchmarks/bench_kernels.py

The script times raw kernel calls and one full curvature build under each
backend.  Backend selection is re-created in a subprocess via
ACHE_LAB_FORCE_PY, since the choice is made at import time.
"""

import json
import os
import subprocess
import sys

WORKER = """
import json, time, timeit
import numpy as np
from ache_lab import _kernels
from ache_lab.structures import su2_torsion
from ache_lab.filling import approximate_ke_metric
from ache_lab.curvature import frame_brackets, CurvatureModel

rng = np.random.default_rng(1234)
sizes = (16, 32, 64)
out = {"backend": _kernels.BACKEND, "conv_us": {}, "inv_us": {}}
for n in sizes:
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    t = timeit.timeit(lambda: _kernels.conv(a, b, n), number=20000)
    out["conv_us"][n] = t / 20000 * 1e6
    f = a.copy(); f[0] = 1.0
    t = timeit.timeit(lambda: _kernels.inv_unit(f, n), number=5000)
    out["inv_us"][n] = t / 5000 * 1e6

s = su2_torsion(0.3 - 0.2j)
t0 = time.perf_counter()
for _ in range(3):
    g = approximate_ke_metric(s, cap=12)
    CurvatureModel(g, frame_brackets(s, cap=12))
out["curvature_build_ms"] = (time.perf_counter() - t0) / 3 * 1e3
print(json.dumps(out))
"""


def run(force_py: bool) -> dict:
    env = dict(os.environ)
    env["ACHE_LAB_FORCE_PY"] = "1" if force_py else "0"
    res = subprocess.run(
        [sys.executable, "-c", WORKER], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    fast = run(force_py=False)
    slow = run(force_py=True)
    print(f"backends: {fast['backend']} vs {slow['backend']}")
    if fast["backend"] == slow["backend"]:
        print("compiled kernel unavailable; only the fallback was timed")
    print(f"{'kernel':<22}{slow['backend']:>14}{fast['backend']:>14}{'speedup':>10}")
    for n, v in fast["conv_us"].items():
        s = slow["conv_us"][n]
        print(f"conv n={n:<4} (us)      {s:14.2f}{v:14.2f}{s / v:10.2f}x")
    for n, v in fast["inv_us"].items():
        s = slow["inv_us"][n]
        print(f"inv  n={n:<4} (us)      {s:14.2f}{v:14.2f}{s / v:10.2f}x")
    s, v = slow["curvature_build_ms"], fast["curvature_build_ms"]
    print(f"curvature build (ms)  {s:14.1f}{v:14.1f}{s / v:10.2f}x")


if __name__ == "__main__":
    main()
