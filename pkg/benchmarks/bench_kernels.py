"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from uam_landing import _kernels_py as py
from uam_landing.observer import AllocationMap, BodyInertia

try:
    from uam_landing import _kernels as cy
except ImportError:
    cy = None

L = (0.118, 0.330, 0.273)


def cases(n, rng):
    Q = rng.uniform(-1.5, 1.5, (n, 3))
    I = BodyInertia.default().I
    N = AllocationMap.x_quad().N_O
    omega = rng.normal(0.0, 0.05, (n, 3))
    u = 10.0 + rng.normal(0.0, 0.1, (n, 4))
    I9 = tuple(I.ravel())
    N12 = tuple(N.ravel())
    return {
        "fk (scalar)": lambda m: [m.fk(*L, 1.0, *q) for q in Q[:2000]],
        "jacobian (scalar)": lambda m: [m.jacobian(*L, 1.0, *q) for q in Q[:2000]],
        "observer_update (scalar)": lambda m: [
            m.observer_update(I9, N12, tuple(w), tuple(uu), 0.004, 25.0, (0.0, 0.0, 0.0),
                              (0.0, 0.0, 0.0)) for w, uu in zip(omega[:2000], u[:2000])],
        "fk_batch": lambda m: m.fk_batch(*L, 1.0, Q),
        "observer_run": lambda m: m.observer_run(I, N, omega, u, 0.004, 25.0, np.zeros(3)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(args.n, rng).items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{name:28s} {tp:10.2f} {'n/a':>10s} {'':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {tp:10.2f} {tc:10.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
