"""Benchmark the compiled solve kernel against the pure NumPy fallback.

Times the raw batched solves at transform-realistic sizes (one matrix per
grid node, a few right-hand sides each) and a full end-to-end transform of
the circle-pole preset under whichever backend is active.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from moutard import kernels
from moutard.kernels import _pysolve


def _time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_solves():
    compiled = None
    if kernels.BACKEND == "compiled":
        from moutard.kernels import _csolve

        compiled = _csolve
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'nodes':>8} {'n':>3} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for m, n in ((65 * 65, 1), (65 * 65, 2), (129 * 129, 2), (129 * 129, 4)):
        a = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
        b = rng.standard_normal((m, n, 3)) + 1j * rng.standard_normal((m, n, 3))
        bt = rng.standard_normal((m, n, 1)) + 1j * rng.standard_normal((m, n, 1))
        t_py = _time(lambda: _pysolve.solve_batch(a, b, bt))
        if compiled is not None:
            t_c = _time(lambda: compiled.solve_batch(a, b, bt))
            print(f"{m:>8} {n:>3} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms "
                  f"{t_py / t_c:>7.1f}x")
        else:
            print(f"{m:>8} {n:>3} {t_py * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>8}")


def bench_pipeline():
    from moutard.cli import main
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        t0 = time.perf_counter()
        main(["example", "ex2-circle-pole", "--out-dir", tmp])
        print(f"\nend-to-end circle-pole preset (129x129, {kernels.BACKEND} backend): "
              f"{1e3 * (time.perf_counter() - t0):.0f}ms")


if __name__ == "__main__":
    bench_solves()
    bench_pipeline()
