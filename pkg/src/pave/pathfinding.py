"""Shortest paths, Yen k-shortest paths, and diverse candidate sets.

Equal-cost paths are broken by the lexicographically smallest node-id
sequence so every result is reproducible.

How the k "diverse" candidates are produced is a choice of this package:
scalarized Dijkstra runs over an evenly spaced time/CO2 weight grid
(pure time and pure CO2 always included for k >= 2), deduplicated by node
sequence, then topped up with Yen's k-shortest paths under travel time.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from . import kernels
from .errors import NoPathError, PreconditionError, UnknownNodeError
from .road_graph import Edge, Graph


@dataclass(frozen=True)
class Objective:
    kind: str  # TIME | CO2 | SCALARIZED
    lam: float | None = None

    def weight(self, graph: Graph, edge: Edge) -> float:
        if self.kind == "TIME":
            return edge.time_s
        if self.kind == "CO2":
            return edge.co2_g
        t_hat = graph.max_time_s or 1.0
        c_hat = graph.max_co2_g or 1.0
        return self.lam * edge.time_s / t_hat + (1.0 - self.lam) * edge.co2_g / c_hat

    def __str__(self):
        return self.kind if self.lam is None else f"{self.kind}({self.lam:g})"


TIME = Objective("TIME")
CO2 = Objective("CO2")


def scalarized(lam: float) -> Objective:
    """Convex time/CO2 blend on graph-max-normalized weights; lam=1 is pure time."""
    if not 0.0 <= lam <= 1.0:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    return Objective("SCALARIZED", float(lam))


@dataclass(frozen=True)
class Route:
    id: int
    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    total_time_s: float
    total_co2_g: float

    @property
    def origin(self) -> str:
        return self.nodes[0]

    @property
    def destination(self) -> str:
        return self.nodes[-1]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "nodes": list(self.nodes),
            "edges": list(self.edges),
            "total_time_s": self.total_time_s,
            "total_co2_g": self.total_co2_g,
        }

    @classmethod
    def from_dict(cls, d) -> "Route":
        return cls(int(d["id"]), tuple(d["nodes"]), tuple(d["edges"]), float(d["total_time_s"]), float(d["total_co2_g"]))


@dataclass(frozen=True)
class CandidateSet:
    routes: tuple[Route, ...]
    k_requested: int

    def __len__(self):
        return len(self.routes)

    def __iter__(self):
        return iter(self.routes)

    def __getitem__(self, route_id: int) -> Route:
        return self.routes[route_id]


class _CSR(NamedTuple):
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    edge_ids: tuple
    slots: dict


def _csr(graph: Graph, objective: Objective) -> _CSR:
    """Collapse parallel edges to the cheapest one under ``objective``."""
    key = ("csr", objective)
    cached = graph._memo.get(key)
    if cached is not None:
        return cached
    index = graph.index
    indptr = [0]
    indices: list[int] = []
    weights: list[float] = []
    edge_ids: list[str] = []
    slots: dict[tuple[int, int], int] = {}
    for u, uid in enumerate(graph.node_ids):
        best: dict[int, tuple[float, str]] = {}
        for e in graph.adjacency[uid]:
            if e.target == uid:
                continue  # self-loops never lie on a simple path
            cand = (objective.weight(graph, e), e.id)
            v = index[e.target]
            if v not in best or cand < best[v]:
                best[v] = cand
        for v in sorted(best):
            slots[(u, v)] = len(indices)
            indices.append(v)
            weights.append(best[v][0])
            edge_ids.append(best[v][1])
        indptr.append(len(indices))
    csr = _CSR(
        np.asarray(indptr, dtype=np.intp),
        np.asarray(indices, dtype=np.intp),
        np.asarray(weights, dtype=np.float64),
        tuple(edge_ids),
        slots,
    )
    graph._memo[key] = csr
    return csr


def _check_nodes(graph: Graph, *node_ids):
    for nid in node_ids:
        if nid not in graph:
            raise UnknownNodeError(nid)


def _node_mask(graph: Graph, excluded: Iterable[str]):
    excluded = [graph.index[n] for n in excluded if n in graph]
    if not excluded:
        return None
    mask = np.zeros(len(graph), dtype=np.uint8)
    mask[excluded] = 1
    return mask


def _build_route(graph: Graph, csr: _CSR, path: list[int] | tuple[int, ...], route_id: int = 0) -> Route:
    ids = graph.node_ids
    edge_ids = tuple(csr.edge_ids[csr.slots[(path[i], path[i + 1])]] for i in range(len(path) - 1))
    total_time = 0.0
    total_co2 = 0.0
    for eid in edge_ids:
        e = graph.edge(eid)
        total_time += e.time_s
        total_co2 += e.co2_g
    return Route(route_id, tuple(ids[i] for i in path), edge_ids, total_time, total_co2)


def route_cost(graph: Graph, route: Route, objective: Objective) -> float:
    """Left-to-right sum of the route's edge weights under ``objective``."""
    cost = 0.0
    for eid in route.edges:
        cost += objective.weight(graph, graph.edge(eid))
    return cost


def shortest_path(graph: Graph, s: str, d: str, objective: Objective = TIME, excluded_nodes: Iterable[str] = ()) -> Route:
    _check_nodes(graph, s, d)
    excluded = set(excluded_nodes)
    if s in excluded or d in excluded:
        raise PreconditionError("excluded_nodes may not contain the source or target")
    if s == d:
        return Route(0, (s,), (), 0.0, 0.0)
    csr = _csr(graph, objective)
    path = kernels.dijkstra(csr.indptr, csr.indices, csr.weights, graph.index[s], graph.index[d], _node_mask(graph, excluded), None)
    if path is None:
        raise NoPathError(s, d, f"objective {objective}")
    return _build_route(graph, csr, path)


def _path_cost(csr: _CSR, path) -> float:
    cost = 0.0
    for i in range(len(path) - 1):
        cost += csr.weights[csr.slots[(path[i], path[i + 1])]]
    return float(cost)


def _yen(graph: Graph, s: str, d: str, objective: Objective) -> Iterator[tuple[int, ...]]:
    """Yield loopless s->d paths (as index tuples) in (cost, sequence) order."""
    csr = _csr(graph, objective)
    src, dst = graph.index[s], graph.index[d]
    first = kernels.dijkstra(csr.indptr, csr.indices, csr.weights, src, dst, None, None)
    if first is None:
        raise NoPathError(s, d, f"objective {objective}")
    accepted = [tuple(first)]
    seen = {accepted[0]}
    yield accepted[0]
    pending: list[tuple[float, tuple[int, ...]]] = []
    n = len(graph)
    m = len(csr.indices)
    while True:
        last = accepted[-1]
        for i in range(len(last) - 1):
            spur = last[i]
            root = last[: i + 1]
            slot_block = np.zeros(m, dtype=np.uint8)
            for p in accepted:
                if len(p) > i + 1 and p[: i + 1] == root:
                    slot_block[csr.slots[(p[i], p[i + 1])]] = 1
            node_block = np.zeros(n, dtype=np.uint8)
            for r in root[:-1]:
                node_block[r] = 1
            spur_path = kernels.dijkstra(csr.indptr, csr.indices, csr.weights, spur, dst, node_block, slot_block)
            if spur_path is None:
                continue
            total = root[:-1] + tuple(spur_path)
            if total in seen:
                continue
            seen.add(total)
            heapq.heappush(pending, (_path_cost(csr, total), total))
        if not pending:
            return
        _, best = heapq.heappop(pending)
        accepted.append(best)
        yield best


def yen_k_shortest(graph: Graph, s: str, d: str, k: int, objective: Objective = TIME) -> list[Route]:
    """Up to ``k`` loopless paths in nondecreasing cost order."""
    _check_nodes(graph, s, d)
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if s == d:
        return [Route(0, (s,), (), 0.0, 0.0)]
    csr = _csr(graph, objective)
    out = []
    for path in _yen(graph, s, d, objective):
        out.append(_build_route(graph, csr, path, len(out)))
        if len(out) == k:
            break
    return out


def lambda_grid(k: int) -> list[float]:
    """k=1 -> [1.0]; otherwise k evenly spaced values from 1.0 down to 0.0."""
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if k == 1:
        return [1.0]
    return [1.0 - i / (k - 1) for i in range(k)]


def _objective_for(lam: float) -> Objective:
    # the endpoints use raw weights so they reproduce the pure optima exactly
    if lam == 1.0:
        return TIME
    if lam == 0.0:
        return CO2
    return scalarized(lam)


def k_candidates(graph: Graph, s: str, d: str, k: int) -> CandidateSet:
    _check_nodes(graph, s, d)
    if s == d:
        raise PreconditionError("candidate generation needs distinct origin and destination")
    routes: list[Route] = []
    # Duplicates are judged by edge sequence: in a multigraph the time- and
    # CO2-optimal routes may visit the same nodes over different parallel
    # edges, and both must survive. On simple graphs this is node-sequence
    # dedup.
    seen: set[tuple[str, ...]] = set()
    for lam in lambda_grid(k):
        r = shortest_path(graph, s, d, _objective_for(lam))
        if r.edges not in seen:
            seen.add(r.edges)
            routes.append(replace(r, id=len(routes)))
    if len(routes) < k:
        csr = _csr(graph, TIME)
        for path in _yen(graph, s, d, TIME):
            r = _build_route(graph, csr, path)
            if r.edges in seen:
                continue
            seen.add(r.edges)
            routes.append(replace(r, id=len(routes)))
            if len(routes) == k:
                break
    return CandidateSet(tuple(routes), k)


def concat_via_waypoint(graph: Graph, s: str, w: str, d: str, excluded_nodes: Iterable[str] = ()) -> Route:
    """Fastest s->w leg followed by the fastest w->d leg."""
    _check_nodes(graph, s, w, d)
    excluded = set(excluded_nodes)
    if w == s:
        return shortest_path(graph, s, d, TIME, excluded)
    first = shortest_path(graph, s, w, TIME, excluded)
    second = shortest_path(graph, w, d, TIME, excluded)
    return Route(
        0,
        first.nodes + second.nodes[1:],
        first.edges + second.edges,
        first.total_time_s + second.total_time_s,
        first.total_co2_g + second.total_co2_g,
    )
