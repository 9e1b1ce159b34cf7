"""Brute-force reference implementations and graph generators used by the tests.

Nothing here calls into the optimized code paths: simple-path enumeration
replaces Dijkstra/Yen, linear scans replace the grid index.
"""
from __future__ import annotations

import math
import random

from pave.road_graph import Edge, Graph, Node

R = 6_371_008.8


def haversine(lon1, lat1, lon2, lat2):
    # same operation order as the library so boundary cases agree bit-for-bit
    d = math.pi / 180.0
    p1 = lat1 * d
    p2 = lat2 * d
    s1 = math.sin((p2 - p1) / 2.0)
    s2 = math.sin(((lon2 - lon1) * d) / 2.0)
    a = s1 * s1 + math.cos(p1) * math.cos(p2) * (s2 * s2)
    return 2.0 * R * math.asin(min(1.0, math.sqrt(max(0.0, a))))


def t3(co2_direct=None) -> Graph:
    """Triangle A->B->C plus the direct A->C edge, all at 36 km/h."""
    from pave.road_graph import graph_from_dict

    doc = {
        "nodes": [
            {"id": "A", "lon": 6.0, "lat": 49.5},
            {"id": "B", "lon": 6.015625, "lat": 49.5},
            {"id": "C", "lon": 6.015625, "lat": 49.515625},
        ],
        "edges": [
            {"id": "AB", "from": "A", "to": "B", "length_m": 1000, "speed_kmh": 36},
            {"id": "BC", "from": "B", "to": "C", "length_m": 1000, "speed_kmh": 36},
            {"id": "AC", "from": "A", "to": "C", "length_m": 2500, "speed_kmh": 36},
        ],
    }
    if co2_direct is not None:
        doc["edges"][2]["co2_g"] = co2_direct
    return graph_from_dict(doc)


def random_graph(rng: random.Random, n_nodes: int, n_edges: int, self_loops: bool = False) -> Graph:
    """Small random multigraph with integer time/CO2 weights (exact float sums)."""
    nodes = [Node(f"n{i}", 6.0 + rng.random() * 0.1, 49.5 + rng.random() * 0.1) for i in range(n_nodes)]
    edges = []
    for j in range(n_edges):
        u = rng.randrange(n_nodes)
        v = rng.randrange(n_nodes)
        if u == v and not self_loops:
            v = (u + 1 + rng.randrange(n_nodes - 1)) % n_nodes
        t = float(rng.randint(1, 20))
        c = float(rng.randint(1, 20))
        edges.append(Edge(f"e{j}", f"n{u}", f"n{v}", t * 10.0, 36.0, t, c))
    return Graph(nodes, edges)


def scalar_weight(graph: Graph, lam: float):
    t_hat = max(e.time_s for e in graph.edges) or 1.0
    c_hat = max(e.co2_g for e in graph.edges) or 1.0
    return lambda e: lam * e.time_s / t_hat + (1.0 - lam) * e.co2_g / c_hat


def simple_paths(graph: Graph, s: str, d: str, weight) -> list[tuple[float, tuple[str, ...]]]:
    """Every simple s->d path as (cost, node ids), sorted by cost then ids.

    Parallel edges contribute their cheapest member; costs are summed left
    to right.
    """
    best: dict[tuple[str, str], float] = {}
    for e in graph.edges:
        if e.source == e.target:
            continue
        w = weight(e)
        key = (e.source, e.target)
        if key not in best or w < best[key]:
            best[key] = w
    succ: dict[str, list[str]] = {}
    for u, v in best:
        succ.setdefault(u, []).append(v)

    out = []

    def walk(path, cost):
        u = path[-1]
        if u == d:
            out.append((cost, tuple(path)))
            return
        for v in succ.get(u, ()):
            if v not in path:
                walk(path + [v], cost + best[(u, v)])

    walk([s], 0.0)
    out.sort()
    return out


def nearest(graph: Graph, lon: float, lat: float) -> str:
    return min(graph.node_ids, key=lambda n: (haversine(lon, lat, graph.nodes[n].lon, graph.nodes[n].lat), n))


def radius_filter(pois, graph: Graph, route_nodes, radius_m: float, tags=None) -> set[str]:
    coords = [(graph.nodes[n].lon, graph.nodes[n].lat) for n in route_nodes]
    hits = set()
    for p in pois:
        if tags is not None and not all(p.tags.get(k) == v for k, v in tags.items()):
            continue
        if min(haversine(p.lon, p.lat, x, y) for x, y in coords) <= radius_m:
            hits.add(p.id)
    return hits
