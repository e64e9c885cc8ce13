"""Benchmark: compiled vs pure-numpy CTC forward kernel.

Usage: python3 benchmarks/bench_ctc.py [--frames 400] [--labels 60] [--reps 50]
"""

import argparse
import time

import numpy as np

from voxenc.ctc import _forward_py

try:
    from voxenc.ctc import _forward_c
except ImportError:
    _forward_c = None


def make_instance(rng, T, n_labels, n_classes=37):
    p = rng.dirichlet(np.ones(n_classes), size=T)
    targets = rng.integers(1, n_classes, size=n_labels)
    ext = np.zeros(2 * n_labels + 1, dtype=np.int64)
    ext[1::2] = targets
    return np.ascontiguousarray(np.log(p)), ext


def bench(fn, instances, reps):
    t0 = time.perf_counter()
    out = 0.0
    for _ in range(reps):
        for lp, ext in instances:
            out += fn(lp, ext)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=400)
    ap.add_argument("--labels", type=int, default=60)
    ap.add_argument("--reps", type=int, default=50)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    instances = [make_instance(rng, args.frames, args.labels) for _ in range(4)]

    t_py, v_py = bench(_forward_py.forward_log_likelihood, instances, args.reps)
    print(f"pure numpy : {t_py:.3f}s total, {t_py / (args.reps * 4) * 1e3:.2f} ms/instance")
    if _forward_c is None:
        print("compiled kernel not built; install with the Cython extension to compare")
        return
    t_c, v_c = bench(_forward_c.forward_log_likelihood, instances, args.reps)
    print(f"compiled   : {t_c:.3f}s total, {t_c / (args.reps * 4) * 1e3:.2f} ms/instance")
    print(f"speedup    : {t_py / t_c:.1f}x  (value agreement: {abs(v_py - v_c):.2e})")


if __name__ == "__main__":
    main()
