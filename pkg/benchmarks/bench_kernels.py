"""Time the mean-study Monte Carlo kernel on the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--trials 2000] [--repeat 3]

Both backends must report the same failure count for every case; the script
exits non-zero otherwise.
"""
import argparse
import sys
import time

from epsiplan import kernels
from epsiplan._backend import HAS_NUMBA
from epsiplan.dp_core import LaplaceScale

CASES = [(1_000, 0.5, 0.1, 0.02), (20_000, 0.5, 0.01, 0.05), (100_000, 0.1, 0.001, 0.05)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    # compile outside the timed region
    kernels.mean_study_failures(0, 0, 1, 10, 0.5, 1.0, 0.1, backend="numba")
    print(f"{'n':>8} {'draws':>12} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'failures':>9}")
    mismatch = False
    for n, mu, eps, T in CASES:
        scale = LaplaceScale.for_mean(n, eps).scale

        def run(backend):
            return kernels.mean_study_failures(args.seed, 0, args.trials, n, mu, scale, T, backend=backend)

        t_nb, f_nb = best_of(lambda: run("numba"), args.repeat)
        t_np, f_np = best_of(lambda: run("numpy"), args.repeat)
        mismatch |= f_nb != f_np
        flag = "" if f_nb == f_np else f" MISMATCH numpy={f_np}"
        print(f"{n:>8} {n * args.trials:>12.3g} {t_nb:>9.4f} {t_np:>9.4f} {t_np / t_nb:>7.1f}x {f_nb:>9}{flag}")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
