"""Compare the compiled and numpy convolution backends.

    python benchmarks/bench_convolve.py [--sizes 257,1025,4097] [--repeat 5]

Reports the best wall time per call for the 1-D kernels and for a short
nonlinear simulation, plus the max relative difference between backends.
"""
import argparse
import timeit

import numpy as np

from cheapns import _fallback, kernels
from cheapns.profiles import make_w
from cheapns.solver import SchemeSpec, simulate
from cheapns.spectral import make_grid, scale

try:
    from cheapns import _kernels
except ImportError:
    _kernels = None


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12}{'N':>7}{'compiled ms':>14}{'numpy ms':>12}{'speedup':>9}{'max rel diff':>14}")
    for n in sizes:
        f, g = rng.random(n), rng.random(n)
        number = max(1, 20000 // n)
        for name, args in (("conv1d", (f, g)), ("autoconv1d", (f,))):
            ref = getattr(_fallback, name)(*args)
            t_py = best(lambda: getattr(_fallback, name)(*args), repeat, number)
            if _kernels is None:
                print(f"{name:<12}{n:>7}{'-':>14}{t_py * 1e3:>12.3f}")
                continue
            out = getattr(_kernels, name)(*args, kernels.thread_count())
            t_c = best(lambda: getattr(_kernels, name)(*args, kernels.thread_count()), repeat, number)
            diff = np.max(np.abs(out - ref)) / np.max(ref)
            print(f"{name:<12}{n:>7}{t_c * 1e3:>14.3f}{t_py * 1e3:>12.3f}{t_py / t_c:>9.2f}{diff:>14.1e}")


def bench_simulate(repeat):
    grid = make_grid(1, 1 / 16, 64.0)
    u0 = scale(make_w(grid), 40.0)

    def run():
        return simulate(u0, 0.005, SchemeSpec("etd1", 1e-4), stride=10 ** 9)

    times = {}
    for label, impl in (("compiled", _kernels), ("numpy", _fallback)):
        if impl is None:
            continue
        saved = kernels._impl
        kernels._impl = impl
        try:
            times[label] = best(run, repeat, 1)
        finally:
            kernels._impl = saved
    print("\nsimulate A=40, N=2049, 50 etd1 steps:")
    for label, t in times.items():
        print(f"  {label:<9}{t * 1e3:9.1f} ms")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="257,1025,2049,4097,16385")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"backend in use: {kernels.BACKEND}, threads: {kernels.thread_count()}\n")
    bench_kernels(sizes, args.repeat)
    bench_simulate(args.repeat)


if __name__ == "__main__":
    main()
