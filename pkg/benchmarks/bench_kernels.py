"""Times the likelihood kernels on both backends.

Run as a script:

    python3 benchmarks/bench_kernels.py [--sizes 10000,100000,1000000] [--repeats 20]

The numba kernels are warmed up before timing so JIT compilation is not
measured.  Without numba installed only the numpy rows are printed.
"""

import argparse
import timeit

import numpy as np

from countreg import _kernels


def make_inputs(n: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    y = rng.poisson(2.0, size=n).astype(np.float64)
    lam = rng.uniform(0.2, 8.0, size=n)
    p = rng.uniform(0.0, 0.9, size=n)
    tau = 1.3
    return y, lam, p, tau


def bench(fn, args, repeats: int) -> float:
    """Best-of-repeats seconds for one call."""
    timer = timeit.Timer(lambda: fn(*args))
    return min(timer.repeat(repeat=repeats, number=1))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10000,100000,1000000")
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    cases = [
        ("nb_logpmf", _kernels.nb_logpmf_numpy, _kernels.nb_logpmf_numba, "ylt"),
        ("zinb_logpmf", _kernels.zinb_logpmf_numpy, _kernels.zinb_logpmf_numba, "ylpt"),
        ("nb_grad_rows", _kernels.nb_grad_rows_numpy, _kernels.nb_grad_rows_numba, "ylt"),
        ("zinb_grad_rows", _kernels.zinb_grad_rows_numpy, _kernels.zinb_grad_rows_numba, "ylpt"),
    ]

    have_numba = _kernels._HAVE_NUMBA
    if have_numba:
        _kernels.warm_up()
    else:
        print("numba unavailable; timing the numpy kernels only")

    header = f"{'kernel':<16s} {'n':>9s} {'numpy ms':>10s}"
    if have_numba:
        header += f" {'numba ms':>10s} {'speedup':>8s}"
    print(header)
    for n in sizes:
        y, lam, p, tau = make_inputs(n)
        for name, fn_numpy, fn_numba, shape in cases:
            call_args = (y, lam, tau) if shape == "ylt" else (y, lam, p, tau)
            t_numpy = bench(fn_numpy, call_args, args.repeats)
            line = f"{name:<16s} {n:>9d} {t_numpy * 1e3:>10.3f}"
            if have_numba:
                t_numba = bench(fn_numba, call_args, args.repeats)
                line += f" {t_numba * 1e3:>10.3f} {t_numpy / t_numba:>7.1f}x"
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
