"""Compare the compiled and pure-Python kernels on leaf solves and full grids.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from foliamod import _kernels_py, gallery, kernels
from foliamod.geometry import densities
from foliamod.optimizer import leaf_problem
from foliamod.quadrature import build_quadrature


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def leaf_batch(rng, count, n, p):
    out = []
    for _ in range(count):
        v = np.exp(rng.uniform(-2, 2, n))
        w = np.exp(rng.uniform(-2, 2, n))
        out.append((v / w**p, w / w.sum()))
    return out


def run_batch(impl, batch, p):
    for c, x0 in batch:
        impl.solve_simplex(c, x0, p, 10000, 1e-12, 1e-10)


def grid_problems(name, counts, p):
    chart = gallery.build_example(name)
    quad = build_quadrature(chart, counts)
    bundle = densities(chart, quad)
    probs = [leaf_problem(bundle, quad, p, leaf) for leaf in np.ndindex(*quad.base_shape)]
    return [(pr.v / pr.w**p, pr.w / pr.w.sum()) for pr in probs]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the Python backend can be timed")
    impls = {"python": _kernels_py}
    if kernels.BACKEND == "cython":
        from foliamod import _kernels
        impls["cython"] = _kernels

    rng = np.random.default_rng(0)
    cases = []
    for n in (16, 64, 256):
        for p in (1.5, 3.0):
            cases.append((f"random leaves n={n} p={p}", leaf_batch(rng, 200, n, p), p))
    cases.append(("torus 128x128 p=1.5", grid_problems("torus", [128, 128], 1.5), 1.5))
    cases.append(("ring 128x256 p=3", grid_problems("ring", [128, 256], 3.0), 3.0))

    header = f"{'case':<32}" + "".join(f"{k:>12}" for k in impls) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, batch, p in cases:
        t = {k: best_of(lambda impl=impl: run_batch(impl, batch, p), args.repeat)
             for k, impl in impls.items()}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{label:<32}" + "".join(f"{t[k]:>11.4f}s" for k in impls) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
