"""Benchmark the compiled (numba) backend against the pure-numpy
fallback on the three hot kernels.

Each backend runs in its own subprocess with PPMTUNE_BACKEND set, so the
numba path pays its JIT warm-up before timing and the numpy path never
imports numba at all.

Usage: python3 benchmarks/bench_backends.py [--n-train 800] [--n-test 200]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r'''
import json, sys, time
import numpy as np
from ppmtune import backends

n_train, n_test, p = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
train_X = rng.uniform(-1, 1, size=(n_train, p))
train_y = (rng.random(n_train) < 0.3).astype(np.float64)
train_y[0], train_y[1] = 0.0, 1.0
test_X = rng.uniform(-1, 1, size=(n_test, p))
m_values = np.array([n_train // 5, n_train // 2], dtype=np.int64)

Xd = np.hstack([np.ones((n_train, 1)), train_X])
x_lo = rng.uniform(0.01, 0.99, 2000)
y_lo = (rng.random(2000) < x_lo).astype(np.float64)

def bench(fn, repeats):
    fn()  # warm-up (includes JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats

results = {
    "backend": backends.BACKEND_NAME,
    "irls_ms": 1e3 * bench(
        lambda: backends.fit_irls(Xd, train_y, 50, 1e-8, 0.0), 20),
    "ppm_batch_s": bench(
        lambda: backends.ppm_predict_multi(
            test_X, train_X, train_y, m_values, 50, 1e-8, 0.0), 3),
    "loess_ms": 1e3 * bench(
        lambda: backends.loess_smooth_values(x_lo, y_lo, 0.75, 1), 5),
}
print(json.dumps(results))
'''


def run_backend(name, sizes):
    env = dict(os.environ, PPMTUNE_BACKEND=name)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(sizes)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-train", type=int, default=800)
    ap.add_argument("--n-test", type=int, default=200)
    ap.add_argument("--p", type=int, default=40)
    args = ap.parse_args()
    sizes = [args.n_train, args.n_test, args.p]
    print("sizes: n_train=%d n_test=%d p=%d" % tuple(sizes))
    rows = [run_backend(n, sizes) for n in ("numpy", "numba")]
    header = ("backend", "irls_ms", "ppm_batch_s", "loess_ms")
    print("%-8s %10s %12s %10s" % header)
    for r in rows:
        print("%-8s %10.3f %12.3f %10.3f"
              % (r["backend"], r["irls_ms"], r["ppm_batch_s"],
                 r["loess_ms"]))
    base, jit = rows
    for key in ("irls_ms", "ppm_batch_s", "loess_ms"):
        print("speedup %-12s %.1fx" % (key, base[key] / jit[key]))


if __name__ == "__main__":
    main()
