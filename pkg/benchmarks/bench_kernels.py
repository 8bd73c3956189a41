"""Compare the compiled union-find sweeps with the pure-Python fallback.

    python benchmarks/bench_kernels.py --sizes 64,128,256 --repeat 3

Both backends run the same edge order and must return identical arrays;
the table reports the best wall-clock time of ``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from clusterperc import _purekernels, rng
from clusterperc.lattice import build_lattice, site_neighbours

try:
    from clusterperc import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--geometry", default="square")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")

    print(f"{'kernel':<6} {'L':>5} {'edges':>9} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for L in (int(x) for x in args.sizes.split(",")):
        lat = build_lattice(args.geometry, L)
        order = rng.stream(0, rng.SWEEP).permutation(lat.M)
        bond = (lat.N, lat.u, lat.v, lat.dx, lat.dy, order, 1)
        t_py, a = best_of(lambda: _purekernels.bond_sweep(*bond), args.repeat)
        t_cy, b = best_of(lambda: _kernels.bond_sweep(*bond), args.repeat)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"{'bond':<6} {L:>5} {lat.M:>9} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.0f}x")

        nb = site_neighbours(lat)
        sorder = rng.stream(0, rng.DILUTE).permutation(lat.N)
        t_py, a = best_of(lambda: _purekernels.site_sweep(lat.N, *nb, sorder), args.repeat)
        t_cy, b = best_of(lambda: _kernels.site_sweep(lat.N, *nb, sorder), args.repeat)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"{'site':<6} {L:>5} {lat.N:>9} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.0f}x")


if __name__ == "__main__":
    main()
