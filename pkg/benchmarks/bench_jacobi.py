"""Compare the compiled and pure-Python Jacobi eigensolvers.

Run: python benchmarks/bench_jacobi.py [--sizes 8,16,32,64] [--repeat 5]
"""
import argparse
import time

import numpy as np

from quasinormal import _jacobi_py
from quasinormal.kernels import BACKEND

try:
    from quasinormal import _jacobi_ext
except ImportError:
    _jacobi_ext = None


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def best_time(fn, h, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(h)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="8,16,32,64")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.Generator(np.random.PCG64(0))
    print(f"active backend: {BACKEND}")
    print(f"{'n':>4} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8} {'max |dw|':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        h = random_hermitian(rng, n)
        tp = best_time(_jacobi_py.jacobi_eigh, h, args.repeat)
        if _jacobi_ext is None:
            print(f"{n:>4} {tp * 1e3:>12.3f} {'n/a':>14} {'n/a':>8} {'n/a':>10}")
            continue
        tc = best_time(_jacobi_ext.jacobi_eigh, h, args.repeat)
        dw = np.abs(_jacobi_py.jacobi_eigh(h)[0] - _jacobi_ext.jacobi_eigh(h)[0]).max()
        print(f"{n:>4} {tp * 1e3:>12.3f} {tc * 1e3:>14.3f} {tp / tc:>8.1f} {dw:>10.2e}")


if __name__ == "__main__":
    main()
