"""Compare the compiled kernel backend against the NumPy fallback.

Runs the three hot kernels on training- and retrieval-shaped workloads,
checks that both backends agree bit-for-bit, and prints best-of-N wall
times with the speedup ratio.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 9 --db-rows 200000
"""
import argparse
import time

import numpy as np

from mihash._kernels import _fallback

try:
    from mihash._kernels import _core
except ImportError:
    _core = None


def _best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _check_equal(name, a, b):
    if isinstance(a, tuple):
        ok = all(np.array_equal(x, y) for x, y in zip(a, b))
    else:
        ok = np.array_equal(a, b)
    if not ok:
        raise AssertionError(f"backend outputs differ for {name}")


def _workloads(gen, n_codes, db_rows):
    u16 = (gen.random((n_codes, 16)) < 0.5).astype(np.uint8)
    u64 = (gen.random((n_codes, 64)) < 0.5).astype(np.uint8)
    coef16 = gen.normal(size=(16, 16, 4))
    coef64 = gen.normal(size=(64, 64, 4))
    for c, k in ((coef16, 16), (coef64, 64)):
        c[np.arange(k), np.arange(k), :] = 0.0
    db1 = gen.integers(0, 2**63, size=(db_rows, 1)).astype(np.uint64)
    db2 = gen.integers(0, 2**63, size=(db_rows, 2)).astype(np.uint64)
    return [
        ("pair_counts      N=%d K=16" % n_codes, "pair_counts", (u16,)),
        ("pair_counts      N=%d K=64" % n_codes, "pair_counts", (u64,)),
        ("mi_grad_gather   N=%d K=16" % n_codes, "mi_grad_gather",
         (u16, coef16)),
        ("mi_grad_gather   N=%d K=64" % n_codes, "mi_grad_gather",
         (u64, coef64)),
        ("hamming_many     N=%d W=1" % db_rows, "hamming_many",
         (db1, db1[0])),
        ("hamming_many     N=%d W=2" % db_rows, "hamming_many",
         (db2, db2[0])),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--codes", type=int, default=2000,
                    help="rows for the training-side kernels")
    ap.add_argument("--db-rows", type=int, default=100_000,
                    help="database rows for hamming_many")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _core is None:
        print("compiled extension not built; nothing to compare "
              "(reinstall with Cython available)")
        return

    gen = np.random.default_rng(args.seed)
    rows = _workloads(gen, args.codes, args.db_rows)

    print(f"{'workload':<34} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, kernel, kargs in rows:
        py_fn = getattr(_fallback, kernel)
        c_fn = getattr(_core, kernel)
        _check_equal(kernel, py_fn(*kargs), c_fn(*kargs))
        t_py = _best_of(py_fn, kargs, args.repeats)
        t_c = _best_of(c_fn, kargs, args.repeats)
        print(f"{label:<34} {t_py * 1e3:>8.3f}ms {t_c * 1e3:>8.3f}ms "
              f"{t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
