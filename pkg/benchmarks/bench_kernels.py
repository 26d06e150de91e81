"""Compare compiled and numpy kernels on the public entry points that use them.

Run ``python benchmarks/bench_kernels.py [--sizes 50,200,1000] [--repeat 5]``.
Prints the best wall time per call for each backend and the speedup.
"""
import argparse
import time

import numpy as np

from bdmix import _backend
from bdmix.core import BDChain, median, stationary
from bdmix.hitting import chain_weights, ell_constant, hardy_C
from bdmix.spectral import eigenvalues


def random_chain(rng, n):
    up = np.exp(rng.uniform(np.log(1e-4), np.log(0.5), n))
    down = np.exp(rng.uniform(np.log(1e-4), np.log(0.5), n))
    return BDChain(np.append(up, 0.0), np.insert(down, 0, 0.0))


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cases(chain):
    dist = stationary(chain)
    i0 = median(dist)
    nu = chain_weights(chain, dist)
    return {
        "eigenvalues": lambda: eigenvalues(chain),
        "ell_constant": lambda: ell_constant(chain, dist, i0),
        "hardy_C": lambda: hardy_C(dist, nu, i0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,200,1000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _backend.HAVE_COMPILED:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")

    rng = np.random.default_rng(args.seed)
    print(f"{'operation':<14}{'n':>6}{'python [ms]':>14}{'compiled [ms]':>15}{'speedup':>9}")
    previous = _backend.name()
    try:
        for n in (int(s) for s in args.sizes.split(",")):
            chain = random_chain(rng, n)
            for label, fn in cases(chain).items():
                timings = {}
                for which in ("python", "compiled"):
                    _backend.use(which)
                    fn()  # warm caches before timing
                    timings[which] = best_time(fn, args.repeat)
                py, cc = timings["python"], timings["compiled"]
                print(f"{label:<14}{n:>6}{py * 1e3:>14.3f}{cc * 1e3:>15.3f}{py / cc:>8.1f}x")
    finally:
        _backend.use(previous)


if __name__ == "__main__":
    main()
