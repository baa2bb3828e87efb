"""Benchmark the compiled kernel backend against the pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 100,500,1000,2000]

Times `gram` and `cross` on random 1-D point sets for the Matérn-5/2 case
and reports the per-call median plus the speedup ratio.  Both backends are
exercised directly, bypassing the import-time selection in nsbandits.kernel.
"""

import argparse
import statistics
import time

import numpy as np

from nsbandits import _nkern

try:
    from nsbandits import _ckern
except ImportError:
    _ckern = None


def time_call(fn, repeats=7):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,500,1000,2000",
                        help="comma-separated point counts")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _ckern is None:
        print("compiled backend not built; showing numpy fallback only")

    rng = np.random.default_rng(0)
    case, inv_l = 2, 1.0  # Matérn-5/2, unit lengthscale
    print(f"{'n':>6} {'op':>6} {'numpy (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for n in sizes:
        X = rng.uniform(0.0, 5.0, (n, 1))
        Y = rng.uniform(0.0, 5.0, (max(n // 2, 1), 1))
        for op, np_call, c_call in [
            ("gram",
             lambda: _nkern.gram(case, inv_l, X, 0.1),
             (lambda: _ckern.gram(case, inv_l, X, 0.1)) if _ckern else None),
            ("cross",
             lambda: _nkern.cross(case, inv_l, X, Y),
             (lambda: _ckern.cross(case, inv_l, X, Y)) if _ckern else None),
        ]:
            t_np = time_call(np_call)
            if c_call is None:
                print(f"{n:>6} {op:>6} {t_np * 1e3:>12.3f} {'-':>14} {'-':>8}")
                continue
            t_c = time_call(c_call)
            print(f"{n:>6} {op:>6} {t_np * 1e3:>12.3f} {t_c * 1e3:>14.3f} "
                  f"{t_np / t_c:>8.2f}")

    if _ckern is not None:
        X = rng.uniform(0.0, 5.0, (500, 1))
        a = _nkern.gram(case, inv_l, X, 0.1)
        b = _ckern.gram(case, inv_l, X, 0.1)
        print(f"\nmax |numpy - compiled| on 500x500 gram: {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
