"""Time the compiled and numpy mode-sum kernels on the reference sweep.

    python3 benchmarks/bench_modesums.py [--repeat 20] [--cutoff 8000]
"""

import argparse
import timeit

import numpy as np

from homotopy_scattering import modesums


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--cutoff", type=int, default=8000)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if modesums.BACKEND == "cython" else [])
    n0s = (4, 5, 6, 8, 12)
    results = {}
    for be in backends:
        run = lambda: [modesums.shell_terms(n0, 1.0, 1.0, args.cutoff, backend=be) for n0 in n0s]
        best = min(timeit.repeat(run, number=1, repeat=args.repeat))
        results[be] = best
        print(f"{be:>7}: {best * 1e3:8.2f} ms per sweep ({len(n0s)} radii, N={args.cutoff})")
    if len(results) == 2:
        ref = [modesums.shell_terms(n0, 1.0, 1.0, args.cutoff, backend="python") for n0 in n0s]
        got = [modesums.shell_terms(n0, 1.0, 1.0, args.cutoff, backend="cython") for n0 in n0s]
        diff = max(float(np.abs(a - b).max()) for a, b in zip(ref, got))
        print(f"speedup {results['python'] / results['cython']:.1f}x, max |difference| {diff:.1e}")
    else:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
