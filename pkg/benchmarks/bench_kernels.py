"""Compare the compiled and NumPy reduction kernels on simulator-shaped data.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from remlab._kernels import _reduce_py

try:
    from remlab._kernels import _reduce as compiled
except ImportError:
    compiled = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"{'case':<28}{'numpy':>12}{'cython':>12}{'speedup':>10}")
    for log_n, m in [(18, 64), (20, 256), (22, 1024), (22, 4194304)]:
        vals = rng.normal(size=2 ** log_n)
        args_eq = (vals, m)
        t_py = _time(_reduce_py.grouped_logsumexp_equal, *args_eq)
        label = f"equal 2^{log_n} m={m}"
        if compiled is not None:
            t_cy = _time(compiled.grouped_logsumexp_equal, *args_eq)
            ok = np.allclose(_reduce_py.grouped_logsumexp_equal(*args_eq),
                             compiled.grouped_logsumexp_equal(*args_eq),
                             rtol=1e-13, atol=1e-13)
            print(f"{label:<28}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms"
                  f"{t_py / t_cy:>9.2f}x" + ("" if ok else "  MISMATCH"))
        else:
            print(f"{label:<28}{t_py * 1e3:>10.2f}ms{'n/a':>12}")
    for log_n, groups in [(20, 1024), (22, 4096)]:
        counts = rng.integers(1, 2 * 2 ** log_n // groups, size=groups)
        offsets = np.zeros(groups + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        vals = rng.normal(size=int(offsets[-1]))
        t_py = _time(_reduce_py.grouped_logsumexp, vals, offsets)
        label = f"csr ~2^{log_n} g={groups}"
        if compiled is not None:
            t_cy = _time(compiled.grouped_logsumexp, vals, offsets)
            ok = np.allclose(_reduce_py.grouped_logsumexp(vals, offsets),
                             compiled.grouped_logsumexp(vals, offsets),
                             rtol=1e-13, atol=1e-13)
            print(f"{label:<28}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms"
                  f"{t_py / t_cy:>9.2f}x" + ("" if ok else "  MISMATCH"))
        else:
            print(f"{label:<28}{t_py * 1e3:>10.2f}ms{'n/a':>12}")


if __name__ == "__main__":
    main()
