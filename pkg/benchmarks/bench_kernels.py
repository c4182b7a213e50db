"""Compare the compiled and numpy Green-function kernels.

    python3 benchmarks/bench_kernels.py --sizes 11,23,35 --repeat 5
"""
import argparse
import timeit

import numpy as np

from qms.geometry import build_square_lattice
from qms.kernels import get_backend


def _cases(n, spacing):
    geom = build_square_lattice(n, n, spacing)
    pos = np.ascontiguousarray(geom.positions)
    axis = np.ascontiguousarray(geom.dipole_axis)
    side = np.linspace(-3, 3, 48)
    xx, yy = np.meshgrid(side, side, indexing="ij")
    obs = np.ascontiguousarray(np.c_[xx.ravel(), yy.ravel(), np.full(xx.size, 2.0)])
    w = np.ascontiguousarray(np.exp(-(xx**2 + yy**2)).ravel().astype(complex))
    k = 2 * np.pi
    return {
        "green_matrix": lambda be: be.green_matrix(pos, axis, k),
        "green_project": lambda be: be.green_project(obs, w, pos, axis, k),
        "lattice_sum": lambda be: be.lattice_sum(spacing, 0.0, 0.0, axis, k, 20.0, 60.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="11,23,35")
    ap.add_argument("--spacing", type=float, default=0.2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = {"python": get_backend("python")}
    try:
        backends["cython"] = get_backend("cython")
    except ImportError:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{'kernel':<14}{'n':>5}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in _cases(n, args.spacing).items():
            times = {}
            for b, be in backends.items():
                fn(be)  # warm up
                times[b] = min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat))
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            cols = "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
            print(f"{name:<14}{n:>5}{cols}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
