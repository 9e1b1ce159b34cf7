"""Pure-Python kernels. Reference behaviour for ``_speedups.pyx``.

Both modules expose the same three functions and must return identical
results for identical inputs; ``tests/test_kernels.py`` checks this.
"""
from __future__ import annotations

import heapq
import math

from .geo import haversine_m

INF = math.inf


def _as_list(seq):
    return seq.tolist() if hasattr(seq, "tolist") else list(seq)


def _path_to(pred, node):
    out = []
    while node != -1:
        out.append(node)
        node = pred[node]
    out.reverse()
    return out


def dijkstra(indptr, indices, weights, src, dst, node_block=None, slot_block=None):
    """Shortest path over a CSR digraph, as a list of node indices.

    Among equal-cost labels the lexicographically smaller index sequence
    wins. Returns ``None`` when ``dst`` is unreachable.
    """
    indptr = _as_list(indptr)
    indices = _as_list(indices)
    weights = _as_list(weights)
    if node_block is not None:
        node_block = _as_list(node_block)
    if slot_block is not None:
        slot_block = _as_list(slot_block)

    n = len(indptr) - 1
    dist = [INF] * n
    pred = [-1] * n
    settled = [False] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u] or d > dist[u]:
            continue
        settled[u] = True
        if u == dst:
            break
        for slot in range(indptr[u], indptr[u + 1]):
            if slot_block is not None and slot_block[slot]:
                continue
            v = indices[slot]
            if settled[v] or (node_block is not None and node_block[v]):
                continue
            c = d + weights[slot]
            if c < dist[v]:
                dist[v] = c
                pred[v] = u
                heapq.heappush(heap, (c, v))
            elif c == dist[v] and pred[v] != u:
                if _path_to(pred, u) + [v] < _path_to(pred, pred[v]) + [v]:
                    pred[v] = u
    if not settled[dst]:
        return None
    return _path_to(pred, dst)


def nearest_index(lons, lats, lon, lat):
    """Index of the first point minimizing great-circle distance to (lon, lat)."""
    best = -1
    best_d = INF
    for i, (x, y) in enumerate(zip(_as_list(lons), _as_list(lats))):
        d = haversine_m(x, y, lon, lat)
        if d < best_d:
            best_d = d
            best = i
    return best


def min_distances(plons, plats, qlons, qlats):
    """For every point p, the distance to its nearest query point q."""
    qs = list(zip(_as_list(qlons), _as_list(qlats)))
    out = []
    for x, y in zip(_as_list(plons), _as_list(plats)):
        best = INF
        for qx, qy in qs:
            d = haversine_m(x, y, qx, qy)
            if d < best:
                best = d
        out.append(best)
    return out
