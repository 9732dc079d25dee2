"""Time the compiled and pure-Python kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each workload runs once to warm up, then ``--repeat`` times; the best
wall time is reported.  End-to-end rows time ``render`` and ``vectorize``
on a 1024 x 1024 synthetic plan.
"""

import argparse
import json
import time

import numpy as np

from floorvec import kernels
from floorvec.raster import render
from floorvec.synth import SynthConfig, generate
from floorvec.vectorizer import vectorize


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    rng = np.random.default_rng(0)
    canvas = np.zeros((1024, 1024), np.uint8)
    xs = np.array([100.0, 900.0, 900.0, 500.0, 500.0, 100.0])
    ys = np.array([100.0, 100.0, 900.0, 900.0, 500.0, 500.0])
    channel = np.zeros((1024, 1024), np.float32)
    centers = rng.uniform(10, 1014, (200, 2))
    heat = np.zeros((1024, 1024), np.float32)
    for x, y in centers:
        kernels.python_backend.splat_gaussian(heat, float(x), float(y), 2.0, 10)
    rows = rng.integers(0, 1024, 5000).astype(np.int64)
    cols = rng.integers(0, 1024, 5000).astype(np.int64)
    pred = rng.integers(0, 12, 1024 * 1024).astype(np.int64)
    gt = rng.integers(0, 12, 1024 * 1024).astype(np.int64)

    def splat(k):
        channel[:] = 0
        for x, y in centers:
            k.splat_gaussian(channel, float(x), float(y), 2.0, 10)

    return {
        "fill_polygon 1024^2 L-shape": lambda k: k.fill_polygon(canvas, xs, ys, 3),
        "splat_gaussian 200 points": splat,
        "local_maxima 1024^2": lambda k: k.local_maxima(heat, 0.4),
        "nms_keep 5000 candidates": lambda k: k.nms_keep(rows, cols, 5.0),
        "confusion_matrix 1024^2, 12 classes": lambda k: k.confusion_matrix(pred, gt, 12),
    }


def end_to_end():
    m = generate(SynthConfig(seed=1, image_size=(1024, 1024), grid=(10, 10), margin=32,
                             icon_count_range=(16, 18), opening_count_range=(6, 8),
                             merge_probability=0.0))
    maps, stack = render(m)
    return {"render 1024^2": lambda: render(m), "vectorize 1024^2": lambda: vectorize(maps, stack)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["compiled"] = kernels.compiled_backend
    else:
        print("compiled backend not built; timing the python backend only")
    results = {}
    for name, fn in workloads().items():
        results[name] = {b: _best(lambda: fn(mod), args.repeat) for b, mod in backends.items()}
    e2e = end_to_end()
    before = kernels.BACKEND
    for name, fn in e2e.items():
        results[name] = {}
        for b in backends:
            kernels.select(b)
            results[name][b] = _best(fn, args.repeat)
    kernels.select(before)

    width = max(map(len, results))
    print(f"{'workload'.ljust(width)}  {'python ms':>10}  {'compiled ms':>11}  {'speedup':>7}")
    for name, row in results.items():
        py = row["python"] * 1e3
        if "compiled" in row:
            c = row["compiled"] * 1e3
            print(f"{name.ljust(width)}  {py:10.3f}  {c:11.3f}  {py / c:6.1f}x")
        else:
            print(f"{name.ljust(width)}  {py:10.3f}  {'-':>11}  {'-':>7}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
