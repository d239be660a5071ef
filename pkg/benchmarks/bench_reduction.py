"""Benchmark the compiled reduction kernel against the pure-Python backend.

Run:  python benchmarks/bench_reduction.py
"""

import time

import numpy as np

from cochainopt import _reduction_py
from cochainopt.complexes import build_lower_star, build_vr, triangulate_grid
from cochainopt.optimize import sliding_window
from cochainopt.complexes import vr_from_distances
from cochainopt.synthetic import noisy_circle, periodic_feature_series, two_blob_image

try:
    from cochainopt import _reduction as _reduction_c
except ImportError:
    _reduction_c = None


def cases():
    fc = build_vr(noisy_circle(10, 0.1, seed=0), max_dim=2)
    yield "vr 10 points (dim<=2)", fc, 1, 50

    fc = build_vr(noisy_circle(20, 0.1, seed=0), max_dim=2)
    yield "vr 20 points (dim<=2)", fc, 1, 10

    img = two_blob_image(24, seed=0)
    fc = build_lower_star(triangulate_grid(24, 24), dict(enumerate(img.ravel())))
    yield "lower-star 24x24 image (deg 0)", fc, 0, 10

    series = periodic_feature_series(seed=0)
    cloud = sliding_window(series, np.full(10, 0.1), 250)
    fc = vr_from_distances(cloud.distances(np.full(10, 0.1)), max_dim=2)
    yield "sliding-window 51 points (dim<=2)", fc, 1, 1


def run(backend, fc, max_degree, repeats):
    fi, fs, fo = fc.facet_arrays()
    t0 = time.perf_counter()
    for _ in range(repeats):
        out = backend.reduce_filtration(len(fc), fc.dims, fi, fs, fo, max_degree)
    return (time.perf_counter() - t0) / repeats, out


def main():
    if _reduction_c is None:
        print("compiled kernel not available; showing pure backend only")
    print(f"{'case':38s} {'simplices':>9s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fc, deg, repeats in cases():
        t_py, out_py = run(_reduction_py, fc, deg, repeats)
        if _reduction_c is not None:
            t_c, out_c = run(_reduction_c, fc, deg, repeats)
            assert out_c == out_py, f"backend mismatch on {name}"
            print(f"{name:38s} {len(fc):9d} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms {t_py / t_c:7.1f}x")
        else:
            print(f"{name:38s} {len(fc):9d} {t_py * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
