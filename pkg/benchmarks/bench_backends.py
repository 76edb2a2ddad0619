"""Benchmark the pair-count kernels: numba direct loop vs numpy FFT.

Both backends produce exact integer counts and must agree bit for bit;
this script times them side by side over a small (K, L) grid and prints
where the crossover sits on the current machine.

    python3 benchmarks/bench_backends.py --name thue_morse
    python3 benchmarks/bench_backends.py --name rudin_shapiro --repeat 5
"""

import argparse
import sys
import time

import numpy as np

from substrum import _kernels
from substrum.core import fixed_point_prefix, seed_letter
from substrum.corpus import CORPUS, load


def bench_one(u, L, K, m, backend, repeat):
    best = float("inf")
    counts = None
    for _ in range(repeat):
        start = time.perf_counter()
        counts = _kernels.pair_counts(u, L, K, m, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, counts


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--name", default="thue_morse", choices=[e.name for e in CORPUS]
    )
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument(
        "--grid",
        default="64:1000000,512:1000000,4096:1000000,4096:4000000",
        help="comma-separated K:L pairs",
    )
    args = parser.parse_args(argv)

    if not _kernels.NUMBA_AVAILABLE:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    z = load(args.name)
    grid = []
    for item in args.grid.split(","):
        k_str, l_str = item.split(":")
        grid.append((int(k_str), int(l_str)))

    max_L = max(L for _, L in grid)
    max_K = max(K for K, _ in grid)
    u = fixed_point_prefix(z, *seed_letter(z), max_L + max_K)

    # trigger the jit compile outside the timed region
    _kernels.pair_counts(u[: 2 * max_K], max_K, max_K, z.size, backend="numba")

    print(f"substitution: {args.name} (m={z.size}), best of {args.repeat}")
    print(f"{'K':>6} {'L':>10} {'numba':>10} {'numpy-fft':>10}  {'auto picks':>10}")
    for K, L in grid:
        t_nb, c_nb = bench_one(u, L, K, z.size, "numba", args.repeat)
        t_np, c_np = bench_one(u, L, K, z.size, "numpy", args.repeat)
        if not np.array_equal(c_nb, c_np):
            print("BACKENDS DISAGREE", file=sys.stderr)
            return 1
        pick = _kernels.resolve_backend(L, K, z.size)
        print(f"{K:>6} {L:>10} {t_nb:>9.3f}s {t_np:>9.3f}s  {pick:>10}")
    print("all counts bit-identical across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())
