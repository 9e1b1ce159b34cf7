"""Multi-weighted directed road network.

Every edge carries a travel time and a CO2 estimate. Graphs are validated
on construction and never mutated afterwards, so they can be shared
freely between threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import EmptyGraphError, NetworkParseError, PreconditionError, ValidationError


@dataclass(frozen=True)
class EmissionCurve:
    """U-shaped speed/emission curve in g/km: ``a/v + b + c*v**2``."""

    a: float = 2000.0
    b: float = 100.0
    c: float = 0.01

    def factor(self, speed_kmh: float) -> float:
        if not speed_kmh > 0:
            raise PreconditionError(f"speed_kmh must be > 0, got {speed_kmh}")
        return self.a / speed_kmh + self.b + self.c * speed_kmh * speed_kmh

    def grams(self, length_m: float, speed_kmh: float) -> float:
        if length_m < 0:
            raise PreconditionError(f"length_m must be >= 0, got {length_m}")
        return (length_m / 1000.0) * self.factor(speed_kmh)


DEFAULT_EMISSIONS = EmissionCurve()


def co2_edge_weight(length_m: float, speed_kmh: float, curve: EmissionCurve = DEFAULT_EMISSIONS) -> float:
    """Grams of CO2 emitted driving ``length_m`` at a constant ``speed_kmh``."""
    return curve.grams(length_m, speed_kmh)


def travel_time_s(length_m: float, speed_kmh: float) -> float:
    return length_m / (speed_kmh / 3.6)


@dataclass(frozen=True)
class Node:
    id: str
    lon: float
    lat: float


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    length_m: float
    speed_kmh: float
    time_s: float
    co2_g: float


class Graph:
    """Immutable directed multigraph with per-edge time and CO2 weights.

    Nodes are also kept in sorted-id order (``node_ids``); kernel code works
    on those integer positions, which makes index order and id order agree.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        node_map: dict[str, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise ValidationError(f"node {node.id!r}: duplicate id")
            if not (-180.0 <= node.lon <= 180.0) or not (-90.0 <= node.lat <= 90.0):
                raise ValidationError(f"node {node.id!r}: coordinates ({node.lon}, {node.lat}) out of range")
            node_map[node.id] = node

        edge_list = list(edges)
        seen: set[str] = set()
        adjacency: dict[str, list[Edge]] = {nid: [] for nid in node_map}
        for e in edge_list:
            if e.id in seen:
                raise ValidationError(f"edge {e.id!r}: duplicate id")
            seen.add(e.id)
            for end in (e.source, e.target):
                if end not in node_map:
                    raise ValidationError(f"edge {e.id!r}: endpoint {end!r} is not a known node")
            if not e.length_m > 0 or not math.isfinite(e.length_m):
                raise ValidationError(f"edge {e.id!r}: length_m must be finite and > 0")
            if not e.speed_kmh > 0 or not math.isfinite(e.speed_kmh):
                raise ValidationError(f"edge {e.id!r}: speed_kmh must be finite and > 0")
            if not e.time_s > 0 or not math.isfinite(e.time_s):
                raise ValidationError(f"edge {e.id!r}: time_s must be finite and > 0")
            if not e.co2_g >= 0 or not math.isfinite(e.co2_g):
                raise ValidationError(f"edge {e.id!r}: co2_g must be finite and >= 0")
            adjacency[e.source].append(e)

        self._nodes = MappingProxyType(node_map)
        self._edges = tuple(edge_list)
        self._edge_by_id = MappingProxyType({e.id: e for e in edge_list})
        self._adjacency = MappingProxyType({k: tuple(v) for k, v in adjacency.items()})
        self.node_ids: tuple[str, ...] = tuple(sorted(node_map))
        self.index = MappingProxyType({nid: i for i, nid in enumerate(self.node_ids)})
        self.lons = np.array([node_map[n].lon for n in self.node_ids], dtype=np.float64)
        self.lats = np.array([node_map[n].lat for n in self.node_ids], dtype=np.float64)
        self.lons.setflags(write=False)
        self.lats.setflags(write=False)
        self.max_time_s = max((e.time_s for e in edge_list), default=0.0)
        self.max_co2_g = max((e.co2_g for e in edge_list), default=0.0)
        # derived lookup structures (CSR per objective), filled lazily
        self._memo: dict = {}

    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def adjacency(self) -> Mapping[str, tuple[Edge, ...]]:
        return self._adjacency

    def edge(self, edge_id: str) -> Edge:
        return self._edge_by_id[edge_id]

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node_id):
        return node_id in self._nodes

    def __repr__(self):
        return f"Graph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "lon": n.lon, "lat": n.lat} for n in self._nodes.values()],
            "edges": [
                {
                    "id": e.id,
                    "from": e.source,
                    "to": e.target,
                    "length_m": e.length_m,
                    "speed_kmh": e.speed_kmh,
                    "time_s": e.time_s,
                    "co2_g": e.co2_g,
                }
                for e in self._edges
            ],
        }


def _field(record: Mapping, key: str, where: str, kind=float, optional=False):
    if key not in record or record[key] is None:
        if optional:
            return None
        raise NetworkParseError(f"{where}: missing field {key!r}")
    value = record[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NetworkParseError(f"{where}: field {key!r} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str) or not value:
        raise NetworkParseError(f"{where}: field {key!r} must be a non-empty string, got {value!r}")
    return value


def graph_from_dict(doc: Mapping, curve: EmissionCurve = DEFAULT_EMISSIONS) -> Graph:
    """Build a Graph from the parsed network document.

    Missing ``time_s`` is derived from length and speed; missing ``co2_g``
    comes from the emission curve. Explicit values are kept verbatim.
    """
    if not isinstance(doc, Mapping):
        raise NetworkParseError("network document must be an object with 'nodes' and 'edges'")
    raw_nodes = doc.get("nodes")
    raw_edges = doc.get("edges")
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise NetworkParseError("network document needs list-valued 'nodes' and 'edges'")

    nodes = []
    for i, rec in enumerate(raw_nodes):
        if not isinstance(rec, Mapping):
            raise NetworkParseError(f"nodes[{i}]: expected an object")
        where = f"nodes[{i}]"
        nid = _field(rec, "id", where, kind=str)
        where = f"node {nid!r}"
        nodes.append(Node(nid, _field(rec, "lon", where), _field(rec, "lat", where)))

    edges = []
    for i, rec in enumerate(raw_edges):
        if not isinstance(rec, Mapping):
            raise NetworkParseError(f"edges[{i}]: expected an object")
        eid = _field(rec, "id", f"edges[{i}]", kind=str)
        where = f"edge {eid!r}"
        length = _field(rec, "length_m", where)
        speed = _field(rec, "speed_kmh", where)
        if not length > 0:
            raise ValidationError(f"{where}: length_m must be > 0, got {length}")
        if not speed > 0:
            raise ValidationError(f"{where}: speed_kmh must be > 0, got {speed}")
        time_s = _field(rec, "time_s", where, optional=True)
        co2 = _field(rec, "co2_g", where, optional=True)
        edges.append(
            Edge(
                id=eid,
                source=_field(rec, "from", where, kind=str),
                target=_field(rec, "to", where, kind=str),
                length_m=length,
                speed_kmh=speed,
                time_s=travel_time_s(length, speed) if time_s is None else time_s,
                co2_g=curve.grams(length, speed) if co2 is None else co2,
            )
        )
    return Graph(nodes, edges)


def load_network(path, curve: EmissionCurve = DEFAULT_EMISSIONS) -> Graph:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkParseError(f"{path}: malformed JSON ({exc})") from exc
    return graph_from_dict(doc, curve)


def nearest_node(graph: Graph, lon: float, lat: float) -> str:
    """Node id closest to (lon, lat) by great-circle distance.

    Ties go to the lexicographically smallest id, which falls out of
    scanning in sorted-id order and keeping the first strict minimum.
    """
    if len(graph) == 0:
        raise EmptyGraphError("cannot snap to an empty graph")
    return graph.node_ids[kernels.nearest_index(graph.lons, graph.lats, float(lon), float(lat))]
