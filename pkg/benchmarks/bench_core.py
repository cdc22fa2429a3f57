"""Compare the compiled core with the pure-Python kernels.

Run ``python3 benchmarks/bench_core.py``; each line reports the median time
per call for both backends and the speed-up.
"""
import argparse
import statistics
import timeit

import numpy as np

from bernloewner import _pycore

try:
    from bernloewner import _core
except ImportError:
    _core = None


def cases(n_atoms: int):
    rng = np.random.default_rng(0)
    xs = rng.uniform(0.05, 4.0, n_atoms)
    ws = rng.uniform(0.0, 1.0, n_atoms)
    z = 0.7 + 1.3j
    return {
        "kernel_sum (code 4)": lambda m: m.kernel_sum(4, xs, ws, z),
        "generator_atoms": lambda m: m.generator_atoms(0.2, 0.5, 0.3, xs, ws, z),
        "flow_atoms t=2": lambda m: m.flow_atoms(0.2, 0.5, 0.3, xs, ws, 2.0, z, 1e-10, 1e-12, np.inf, 100000),
    }


def median_time(fn, repeat: int, number: int) -> float:
    return statistics.median(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--atoms", type=int, nargs="+", default=[4, 64])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled core not built; only the pure-Python timings are shown")
    print(f"{'kernel':<22}{'atoms':>6}{'python [us]':>14}{'compiled [us]':>16}{'speed-up':>10}")
    for n in args.atoms:
        for name, fn in cases(n).items():
            number = 20 if name.startswith("flow") else 2000
            t_py = median_time(lambda: fn(_pycore), args.repeat, number)
            if _core is None:
                print(f"{name:<22}{n:>6}{t_py * 1e6:>14.2f}")
                continue
            t_c = median_time(lambda: fn(_core), args.repeat, number)
            print(f"{name:<22}{n:>6}{t_py * 1e6:>14.2f}{t_c * 1e6:>16.2f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
