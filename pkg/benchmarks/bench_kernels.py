"""Compare the numba and pure-numpy special-function backends.

Usage::

    python benchmarks/bench_kernels.py [--size 100000] [--repeat 5]

Reports the best-of-``repeat`` wall time per call for each kernel and
backend, plus the largest absolute disagreement between the two.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from latent_oce._kernels import _numba as nb
from latent_oce._kernels import _numpy as npb


def _inputs(size: int, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    h = rng.uniform(-6, 6, size)
    k = rng.uniform(-6, 6, size)
    rho = rng.uniform(-0.99, 0.99, size)
    a = rng.standard_cauchy(size)
    p = rng.uniform(1e-12, 1 - 1e-12, size)
    return {
        "norm_cdf": (h,),
        "norm_ppf": (p,),
        "owen_t": (h, a),
        "bvn_cdf": (h, k, rho),
    }


def _best(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':<10s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, inp in _inputs(args.size).items():
        f_nb, f_np = getattr(nb, name), getattr(npb, name)
        f_nb(*(x[:8] for x in inp))  # compile outside the timed region
        t_nb = _best(f_nb, inp, args.repeat)
        t_np = _best(f_np, inp, args.repeat)
        diff = float(np.max(np.abs(np.asarray(f_nb(*inp)) - np.asarray(f_np(*inp)))))
        print(f"{name:<10s} {t_nb * 1e3:11.2f} {t_np * 1e3:11.2f} {t_np / t_nb:8.1f}x {diff:11.1e}")


if __name__ == "__main__":
    main()
