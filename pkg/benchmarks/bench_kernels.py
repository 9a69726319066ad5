"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from aquamass import _pykernels

try:
    from aquamass import _ckernels
except ImportError:
    _ckernels = None


def cases(size=256, samples=100_000):
    rng = np.random.default_rng(0)
    angles = np.sort(rng.uniform(0, 2 * math.pi, 24))
    radius = rng.uniform(0.3, 0.48, 24) * size
    xs = size / 2 + radius * np.cos(angles)
    ys = size / 2 + radius * np.sin(angles)
    mask = (rng.random((size, size)) < 0.55).astype(np.uint8)
    return {
        f"uniform_doubles n={samples}": lambda k: k.uniform_doubles(7, samples),
        f"rasterize_polygon 24 verts {size}x{size}": lambda k: k.rasterize_polygon(xs, ys, size, size),
        f"erode square {size}x{size}": lambda k: k.erode(mask, False),
        f"dilate cross {size}x{size}": lambda k: k.dilate(mask, True),
        f"label8 {size}x{size}": lambda k: k.label8(mask),
    }


def best_of(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `python setup.py build_ext --inplace` first")
    print(f"{'kernel':<40} {'python ms':>11} {'cython ms':>11} {'speedup':>8}")
    for name, call in cases().items():
        py = best_of(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:<40} {py * 1e3:>11.3f} {'-':>11} {'-':>8}")
            continue
        cy = best_of(lambda: call(_ckernels), args.repeat)
        print(f"{name:<40} {py * 1e3:>11.3f} {cy * 1e3:>11.3f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
