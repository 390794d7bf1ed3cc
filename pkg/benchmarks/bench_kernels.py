"""Time the compiled core against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``; prints one row per workload.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from walkcum import _fallback
from walkcum.diagrams import LAMBDA, MU, shape
from walkcum.ensemble import EnsembleParams, sample_graph

try:
    from walkcum import _core
except ImportError:  # fallback-only install
    _core = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def census_workloads():
    for k, q, kind in [(2, 3, LAMBDA), (2, 4, LAMBDA), (3, 3, LAMBDA), (4, 2, LAMBDA), (4, 3, MU)]:
        shp = shape(k, q, kind)
        args = (shp.n_slots, *shp.arrays(), k, 0 if kind == LAMBDA else 1, ())
        yield f"census k={k} q={q} {kind}", lambda m, a=args: m.census_counts(*a)


def triangle_workloads():
    for N, c, R in [(2001, 200.0, 20.0), (10001, 2000.0, 30.0)]:
        g = sample_graph(EnsembleParams.from_N(N, c, R, seed=1))
        w = g.edge_weights()
        yield f"triangles N={N} edges={g.n_edges}", lambda m, g=g, w=w: m.triangle_weight_sum(g.N, g.rows, g.cols, w)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'workload':40s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn in [*census_workloads(), *triangle_workloads()]:
        tp, out_p = _best(lambda: fn(_fallback), args.repeat)
        if _core is None:
            print(f"{name:40s} {'n/a':>13s} {tp:11.4f} {'n/a':>8s}")
            continue
        tc, out_c = _best(lambda: fn(_core), args.repeat)
        same = all(np.allclose(a, b) for a, b in zip(out_c, out_p))
        flag = "" if same else "  MISMATCH"
        print(f"{name:40s} {tc:13.4f} {tp:11.4f} {tp / tc:7.1f}x{flag}")


if __name__ == "__main__":
    main()
