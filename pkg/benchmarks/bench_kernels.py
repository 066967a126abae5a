"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from pmin import kernels
from pmin.profile import SurfaceProfile
from pmin.ruled import sample_profile


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    prof = SurfaceProfile.from_dict({"theta": "atan(t) + pi/2", "alpha": 0, "beta": "t", "gamma": "-t"})
    s = np.linspace(-10, 10, 1000)
    smp = sample_profile(prof, np.linspace(-10, 10, 1000))
    co = (smp.dtheta, smp.delta, smp.ddelta, smp.xi, smp.dxi, smp.dgamma)
    R = kernels.singular_grid(s, *co)
    bi, bj = np.nonzero(R[:, :-1] * R[:, 1:] < 0)
    sub = smp.take(bi)
    sub_co = (sub.dtheta, sub.delta, sub.ddelta, sub.xi, sub.dxi, sub.dgamma)
    pair = sample_profile(prof, np.linspace(-10, 10, 600))
    h = 1 / 128
    x = np.arange(-2, 259) * h + 0.5
    y = np.arange(-2, 259) * h - 1.0
    U = y[None, :] / x[:, None]
    return {
        "singular_grid 1000x1000": lambda b: kernels.singular_grid(s, *co, backend=b),
        "cross_grid 1000x1000": lambda b: kernels.cross_grid(s, smp.theta, *co, backend=b),
        f"bisect_singular x{len(bi)}": lambda b: kernels.bisect_singular(s[bj], s[bj + 1], *sub_co, backend=b),
        "pair_gaps 600x600": lambda b: kernels.pair_gaps(pair.theta, pair.alpha, pair.beta, pair.gamma, backend=b),
        "pde_divergence 261x261": lambda b: kernels.pde_divergence(U, x, y, h, backend=b),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases().items():
        times = [_best(lambda: fn(b), args.repeat) for b in backends]
        row = f"{name:28s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
