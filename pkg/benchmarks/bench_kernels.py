"""Compare the compiled and pure-Python kernels on city-sized inputs.

    python3 benchmarks/bench_kernels.py [--grid 120] [--pois 20000] [--repeat 5]

Reports best-of-N wall time per kernel and backend, and checks that both
backends return identical results on every input.
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from pave.kernels import available_backends


def grid_csr(side: int, rng: random.Random):
    """Bidirectional side x side grid with random positive weights."""
    n = side * side
    adj = [[] for _ in range(n)]
    for r in range(side):
        for c in range(side):
            u = r * side + c
            for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < side and 0 <= cc < side:
                    adj[u].append((rr * side + cc, rng.uniform(10.0, 120.0)))
    indptr, indices, weights = [0], [], []
    for u in range(n):
        for v, w in sorted(adj[u]):
            indices.append(v)
            weights.append(w)
        indptr.append(len(indices))
    return np.array(indptr, dtype=np.intp), np.array(indices, dtype=np.intp), np.array(weights)


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=120, help="grid side length (nodes = side^2)")
    ap.add_argument("--pois", type=int, default=20000)
    ap.add_argument("--route-len", type=int, default=60)
    ap.add_argument("--queries", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the pure-Python backend is available")

    indptr, indices, weights = grid_csr(args.grid, rng)
    n = args.grid * args.grid
    pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(args.queries)]
    plon = np.array([6.0 + rng.random() * 0.2 for _ in range(args.pois)])
    plat = np.array([49.5 + rng.random() * 0.2 for _ in range(args.pois)])
    qlon = np.array([6.0 + rng.random() * 0.2 for _ in range(args.route_len)])
    qlat = np.array([49.5 + rng.random() * 0.2 for _ in range(args.route_len)])

    cases = {
        f"dijkstra ({n} nodes, {args.queries} queries)":
            lambda k: [k.dijkstra(indptr, indices, weights, s, d) for s, d in pairs],
        f"min_distances ({args.pois} POIs x {args.route_len} route nodes)":
            lambda k: list(k.min_distances(plon, plat, qlon, qlat)),
        f"nearest_index ({args.pois} points, {args.queries} queries)":
            lambda k: [k.nearest_index(plon, plat, float(qlon[i]), float(qlat[i])) for i in range(args.queries)],
    }

    print(f"{'kernel':58s} {'backend':8s} {'best s':>10s} {'speedup':>8s}")
    for label, case in cases.items():
        timings = {}
        outputs = {}
        for name, impl in backends.items():
            timings[name], outputs[name] = best_of(lambda: case(impl), args.repeat)
        base = timings["python"]
        for name, t in timings.items():
            print(f"{label:58s} {name:8s} {t:10.4f} {base / t:7.1f}x")
        same = all(o == outputs["python"] for o in outputs.values())
        print(f"{'':58s} results identical: {same}")


if __name__ == "__main__":
    main()
