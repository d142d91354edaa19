"""Compare the compiled and pure-numpy kernels on the discrimination sweep.

    python benchmarks/bench_kernels.py --topics 25000 --repeat 3
"""

import argparse
import importlib
import time

import numpy as np

from trendvis import _kernels_py
from trendvis.regression import _design
from trendvis.synth import SynthConfig, generate_dataset
from trendvis.visibility import make_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--topics", type=int, default=25_000)
    ap.add_argument("--exit-prob", type=float, default=0.0072, help="about 100 observations per topic")
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    ds = generate_dataset(SynthConfig(n_topics=args.topics, seed=args.seed, sigma=0.2, exit_prob=args.exit_prob))
    print(f"generated {args.topics} topics, {ds.n_observations} observations in {time.perf_counter() - t0:.2f} s")
    _, hist, y = _design(ds)
    grid = np.array(make_grid())

    backends = [_kernels_py]
    try:
        backends.append(importlib.import_module("trendvis._kernels"))
    except ImportError:
        print("compiled kernels not built; python only")

    results = {}
    for mod in backends:
        vis = best_of(lambda: mod.visibility_matrix(hist, grid), args.repeat)
        sweep = best_of(lambda: mod.loglog_sweep(hist, y, grid), args.repeat)
        results[mod.BACKEND] = (vis, sweep)
        print(f"{mod.BACKEND:>7}: visibility_matrix {vis * 1e3:8.1f} ms   loglog_sweep {sweep * 1e3:8.1f} ms")
    if len(results) == 2:
        (pv, ps), (cv, cs) = results["python"], results["cython"]
        print(f"speedup: visibility_matrix x{pv / cv:.1f}   loglog_sweep x{ps / cs:.1f}")
        a = _kernels_py.loglog_sweep(hist, y, grid)
        b = backends[1].loglog_sweep(hist, y, grid)
        print(f"max |sxy| difference between backends: {np.max(np.abs(a[2] - b[2])):.3g}")


if __name__ == "__main__":
    main()
