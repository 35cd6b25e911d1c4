"""Benchmark the compiled kernel backend against the numpy fallback.

Runs each backend in a subprocess (backend choice is fixed at import time,
so the comparison needs one interpreter per side) and prints per-kernel
microbenchmark timings plus an end-to-end engine run.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --pixels 500000 --iterations 400
"""

import argparse
import json
import os
import subprocess
import sys
import time


def measure(fn, repeats):
    """Best-of-N wall time for fn(), in seconds."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_measurements(pixels, iterations, repeats):
    import numpy as np

    from adaptseg import _kernels
    from adaptseg.analysis import generate_noise
    from adaptseg.engine import Segmentation, StopCriterion

    rng = np.random.default_rng(42)
    width = 1024
    height = (pixels + width - 1) // width
    plane = rng.integers(0, 256, width * height).astype(np.float64)
    idx = rng.choice(plane.size, size=pixels, replace=False).astype(np.int64)
    idx.sort()
    mean = float(plane[idx].mean())
    mask = _kernels.sign_mask(plane, idx, mean)
    lo_r = int(idx.min() // width)
    nbins = int(idx.max() // width) - lo_r + 1

    timings = {
        "stats_1d": measure(lambda: _kernels.stats_1d(plane, idx), repeats),
        "abs_dev_sum": measure(
            lambda: _kernels.abs_dev_sum(plane, idx, mean), repeats),
        "sign_mask": measure(
            lambda: _kernels.sign_mask(plane, idx, mean), repeats),
        "masked_sum": measure(
            lambda: _kernels.masked_sum(plane, idx, mask), repeats),
        "bbox": measure(lambda: _kernels.bbox(idx, width), repeats),
        "coord_counts": measure(
            lambda: _kernels.coord_counts(idx, width, 0, lo_r, nbins),
            repeats),
        "coord_sums": measure(
            lambda: _kernels.coord_sums(plane, idx, width, 0, lo_r, nbins),
            repeats),
    }

    eng = Segmentation(generate_noise(256, 256, seed=7))
    start = time.perf_counter()
    eng.run(StopCriterion(max_iterations=iterations))
    timings["engine_run"] = time.perf_counter() - start

    return {"backend": _kernels.BACKEND, "timings": timings}


def run_child(backend, args):
    env = dict(os.environ, ADAPTSEG_KERNELS=backend)
    cmd = [sys.executable, os.path.abspath(__file__), "--child",
           "--pixels", str(args.pixels),
           "--iterations", str(args.iterations),
           "--repeats", str(args.repeats)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        return None
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pixels", type=int, default=200_000,
                        help="region size for the kernel microbenchmarks")
    parser.add_argument("--iterations", type=int, default=300,
                        help="engine iterations for the end-to-end run")
    parser.add_argument("--repeats", type=int, default=20,
                        help="best-of-N repeats per kernel")
    parser.add_argument("--child", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.child:
        json.dump(run_measurements(args.pixels, args.iterations,
                                   args.repeats), sys.stdout)
        return 0

    results = {}
    for backend in ("python", "cython"):
        res = run_child(backend, args)
        if res is None:
            print(f"{backend}: unavailable, skipping", file=sys.stderr)
            continue
        results[res["backend"]] = res["timings"]

    if not results:
        print("no backend ran", file=sys.stderr)
        return 1

    names = list(next(iter(results.values())))
    cols = list(results)
    header = f"{'kernel':<14}" + "".join(f"{c:>12}" for c in cols)
    if len(cols) == 2:
        header += f"{'speedup':>10}"
    print(f"pixels={args.pixels}  engine iterations={args.iterations}  "
          f"best of {args.repeats}")
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<14}"
        for c in cols:
            row += f"{results[c][name] * 1e3:>10.3f}ms"
        if len(cols) == 2:
            ratio = results[cols[0]][name] / results[cols[1]][name]
            row += f"{ratio:>9.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
