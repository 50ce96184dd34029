"""Benchmark the compiled membrane kernel against the numpy fallback.

Runs the fused RK4 right-hand side on a centered sech background plus a bump
perturbation for a few grid sizes and reports per-call timings and the
speedup.  Both backends must agree to rounding; that is asserted here too.

Usage: python benchmarks/bench_kernels.py [--sizes 129,257,513] [--reps 20]
"""

import argparse
import time

import numpy as np

from membrane_lab.accel import available_backends
from membrane_lab.grid import Grid2D, make_bump
from membrane_lab.waves import profile


def setup(n: int):
    g = Grid2D(-11.0, 11.0, -11.0, 11.0, n, n)
    u = make_bump(g, (0.0, 0.0), 0.9, 1e-3).values
    w = 0.5 * make_bump(g, (0.1, 0.0), 0.8, 1e-3).values
    p = profile("sech", 0.5)
    xi = g.x1 + 0.3
    return g, u, w, (
        np.asarray(p.eval(xi)),
        np.asarray(p.d1(xi)),
        np.asarray(p.d2(xi)),
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="129,257,513")
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("note: compiled extension not built; timing the numpy kernel only")
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'n':>6} " + " ".join(f"{name + ' (ms)':>14}" for name in backends) + f" {'speedup':>9}")
    for n in sizes:
        g, u, w, (bF, bFp, bFpp) = setup(n)
        times = {}
        results = {}
        for name, kern in backends.items():
            kern(u, w, bF, bFp, bFpp, 0.0, 1.0, 1.0, g.x2, g.h1, g.h2, 4)  # warm up
            t0 = time.perf_counter()
            for _ in range(args.reps):
                out, mind, cmax = kern(u, w, bF, bFp, bFpp, 0.0, 1.0, 1.0, g.x2, g.h1, g.h2, 4)
            times[name] = (time.perf_counter() - t0) / args.reps * 1e3
            results[name] = out
        if len(results) == 2:
            diff = float(np.max(np.abs(results["numpy"] - results["cython"])))
            scale = max(1e-300, float(np.max(np.abs(results["numpy"]))))
            assert diff <= 1e-12 * max(1.0, scale / 1e-6), f"backend mismatch {diff:.2e}"
            speedup = times["numpy"] / times["cython"]
        else:
            speedup = float("nan")
        print(
            f"{n:>6} "
            + " ".join(f"{times[name]:>14.3f}" for name in backends)
            + f" {speedup:>8.2f}x"
        )


if __name__ == "__main__":
    main()
