"""Timing of the compiled gauge kernels against the numpy fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.  Prints one
line per (kernel, dimension, backend) with the best per-call time and
the speed-up of the compiled backend; agreement of the two backends is
asserted on every input.
"""

import argparse
import timeit

import numpy as np

from nalab.kernels import backends
from nalab.norms import PhiSequence


def _cases(dim, count, rng):
    phi = PhiSequence.dyadic(dim).weights
    d = 0.1 / np.arange(1, dim + 1)
    return phi, d, rng.standard_normal((count, dim))


def run(dims=(4, 16, 64, 256), count=200, repeat=5):
    mods = backends()
    rng = np.random.default_rng(0)
    rows = []
    for dim in dims:
        phi, d, Y = _cases(dim, count, rng)
        for name, weights in (("phi_gauge", phi), ("box_gauge", d)):
            ref = np.array([getattr(mods["python"], name)(y, weights)[0] for y in Y])
            times = {}
            for backend, mod in mods.items():
                fn = getattr(mod, name)
                got = np.array([fn(y, weights)[0] for y in Y])
                assert np.allclose(got, ref, rtol=1e-12, atol=0), (name, dim, backend)
                t = min(timeit.repeat(lambda: [fn(y, weights) for y in Y], number=1, repeat=repeat))
                times[backend] = t / count
            for backend, t in times.items():
                speed = times["python"] / t
                rows.append((name, dim, backend, t, speed))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--count", type=int, default=200)
    args = ap.parse_args()
    print(f"{'kernel':<10} {'dim':>5} {'backend':<8} {'us/call':>10} {'speed-up':>9}")
    for name, dim, backend, t, speed in run(count=args.count, repeat=args.repeat):
        print(f"{name:<10} {dim:>5} {backend:<8} {t * 1e6:>10.2f} {speed:>8.1f}x")


if __name__ == "__main__":
    main()
