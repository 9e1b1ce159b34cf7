"""Route annotation and the evaluation dossier."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Sequence

from .errors import NoPathError, PreconditionError
from .pathfinding import TIME, Route, shortest_path
from .poi_cache import DEFAULT_RADIUS_M, PoiCache, query_radius_with_distance
from .road_graph import Graph
from .tasking import ClassifiedTask

TRAFFIC_LEVELS = ("LOW", "MEDIUM", "HIGH")
AVOID_KINDS = ("NODE", "TAG")


@dataclass(frozen=True)
class AvoidRule:
    """Either a node id to stay off, or a ``key=value`` POI tag to stay away from."""

    kind: str
    value: str

    def __post_init__(self):
        if self.kind not in AVOID_KINDS:
            raise PreconditionError(f"avoid kind must be NODE or TAG, got {self.kind!r}")
        if self.kind == "TAG" and "=" not in self.value:
            raise PreconditionError(f"TAG avoid rule needs key=value, got {self.value!r}")

    @property
    def tag_filter(self) -> dict:
        key, _, value = self.value.partition("=")
        return {key: value}

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class UserContext:
    preferences: tuple[str, ...] = ()
    avoid: tuple[AvoidRule, ...] = ()

    def to_dict(self):
        return {"preferences": list(self.preferences), "avoid": [a.to_dict() for a in self.avoid]}

    @classmethod
    def from_dict(cls, d) -> "UserContext":
        return cls(tuple(d.get("preferences", ())), tuple(AvoidRule(a["kind"], a["value"]) for a in d.get("avoid", ())))

    @property
    def avoided_nodes(self) -> frozenset[str]:
        return frozenset(a.value for a in self.avoid if a.kind == "NODE")


@dataclass(frozen=True)
class ScenarioContext:
    time_of_day: str = "12:00"
    traffic: str = "MEDIUM"
    notes: str = ""

    def __post_init__(self):
        if not re.fullmatch(r"([01]\d|2[0-3]):[0-5]\d", self.time_of_day):
            raise PreconditionError(f"time_of_day must be HH:MM, got {self.time_of_day!r}")
        if self.traffic not in TRAFFIC_LEVELS:
            raise PreconditionError(f"traffic must be one of {TRAFFIC_LEVELS}, got {self.traffic!r}")

    @classmethod
    def now(cls, traffic: str = "MEDIUM", notes: str = "") -> "ScenarioContext":
        return cls(datetime.now().strftime("%H:%M"), traffic, notes)

    def to_dict(self):
        return {"time_of_day": self.time_of_day, "traffic": self.traffic, "notes": self.notes}

    @classmethod
    def from_dict(cls, d) -> "ScenarioContext":
        return cls(d.get("time_of_day", "12:00"), d.get("traffic", "MEDIUM"), d.get("notes", ""))


@dataclass(frozen=True)
class PoiHit:
    poi_id: str
    name: str
    tags: dict = field(hash=False)
    distance_m: float = 0.0
    node_id: str = ""

    def to_dict(self):
        return {"poi_id": self.poi_id, "name": self.name, "tags": dict(self.tags),
                "distance_m": self.distance_m, "node_id": self.node_id}

    @classmethod
    def from_dict(cls, d) -> "PoiHit":
        return cls(d["poi_id"], d["name"], dict(d["tags"]), float(d["distance_m"]), d["node_id"])


@dataclass(frozen=True)
class RouteAnnotation:
    route_id: int
    total_time_s: float
    total_co2_g: float
    nodes: tuple[str, ...]
    poi_hits: tuple[PoiHit, ...] = ()
    urgent_poi_time_s: float | None = None
    urgent_poi_id: str | None = None
    urgent_poi_node_id: str | None = None
    avoid_hits: tuple[str, ...] = ()

    def __post_init__(self):
        present = [x is not None for x in (self.urgent_poi_time_s, self.urgent_poi_id, self.urgent_poi_node_id)]
        if any(present) and not all(present):
            raise PreconditionError("urgent POI fields must be present together")

    def to_dict(self):
        return {
            "route_id": self.route_id,
            "total_time_s": self.total_time_s,
            "total_co2_g": self.total_co2_g,
            "nodes": list(self.nodes),
            "poi_hits": [h.to_dict() for h in self.poi_hits],
            "urgent_poi_time_s": self.urgent_poi_time_s,
            "urgent_poi_id": self.urgent_poi_id,
            "urgent_poi_node_id": self.urgent_poi_node_id,
            "avoid_hits": list(self.avoid_hits),
        }

    @classmethod
    def from_dict(cls, d) -> "RouteAnnotation":
        t = d.get("urgent_poi_time_s")
        return cls(
            int(d["route_id"]),
            float(d["total_time_s"]),
            float(d["total_co2_g"]),
            tuple(d["nodes"]),
            tuple(PoiHit.from_dict(h) for h in d.get("poi_hits", ())),
            None if t is None else float(t),
            d.get("urgent_poi_id"),
            d.get("urgent_poi_node_id"),
            tuple(d.get("avoid_hits", ())),
        )


@dataclass(frozen=True)
class Dossier:
    user_context: UserContext
    scenario_context: ScenarioContext
    tasks: tuple[ClassifiedTask, ...]
    routes: tuple[RouteAnnotation, ...]

    def route(self, route_id: int) -> RouteAnnotation | None:
        for r in self.routes:
            if r.route_id == route_id:
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "user_context": self.user_context.to_dict(),
            "scenario_context": self.scenario_context.to_dict(),
            "tasks": [t.to_dict() for t in self.tasks],
            "routes": [r.to_dict() for r in self.routes],
        }

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, fixed indent."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d) -> "Dossier":
        return cls(
            UserContext.from_dict(d["user_context"]),
            ScenarioContext.from_dict(d["scenario_context"]),
            tuple(ClassifiedTask.from_dict(t) for t in d["tasks"]),
            tuple(RouteAnnotation.from_dict(r) for r in d["routes"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Dossier":
        return cls.from_dict(json.loads(text))


def annotate_route(
    route: Route,
    graph: Graph,
    cache: PoiCache,
    tasks: Sequence[ClassifiedTask],
    radius_m: float = DEFAULT_RADIUS_M,
    avoid: Iterable[AvoidRule] = (),
) -> RouteAnnotation:
    """Attach nearby task POIs, urgent reachability and avoid-tag hits to a route.

    Urgent reachability is the fastest time from the trip origin to any
    urgent-task POI lying within ``radius_m`` of this route.
    """
    hits: dict[str, tuple[float, PoiHit]] = {}
    for task in tasks:
        if task.urgent:
            continue
        for poi, dist in query_radius_with_distance(cache, route, graph, radius_m, task.osm_tags):
            hits[poi.id] = (dist, PoiHit(poi.id, poi.name, dict(poi.tags), dist, poi.linked_node))
    poi_hits = tuple(h for _, h in sorted(hits.values(), key=lambda x: (x[0], x[1].poi_id)))

    best = None
    origin = route.nodes[0]
    reach: dict[str, float | None] = {}
    for task in tasks:
        if not task.urgent:
            continue
        for poi, _ in query_radius_with_distance(cache, route, graph, radius_m, task.osm_tags):
            node = poi.linked_node
            if node not in reach:
                try:
                    reach[node] = shortest_path(graph, origin, node, TIME).total_time_s
                except NoPathError:
                    reach[node] = None
            t = reach[node]
            if t is not None and (best is None or (t, poi.id) < best[:2]):
                best = (t, poi.id, node)

    avoid_hits: list[tuple[float, str]] = []
    for rule in avoid:
        if rule.kind == "TAG":
            avoid_hits.extend((d, p.id) for p, d in query_radius_with_distance(cache, route, graph, radius_m, rule.tag_filter))
    avoid_ids = tuple(dict.fromkeys(pid for _, pid in sorted(avoid_hits)))

    return RouteAnnotation(
        route.id,
        route.total_time_s,
        route.total_co2_g,
        route.nodes,
        poi_hits,
        None if best is None else best[0],
        None if best is None else best[1],
        None if best is None else best[2],
        avoid_ids,
    )


def build_dossier(
    annotations: Sequence[RouteAnnotation],
    user_context: UserContext | None = None,
    scenario_context: ScenarioContext | None = None,
    tasks: Sequence[ClassifiedTask] = (),
) -> Dossier:
    annotations = tuple(annotations)
    if not annotations:
        raise PreconditionError("a dossier needs at least one route")
    ids = [a.route_id for a in annotations]
    if len(set(ids)) != len(ids):
        raise PreconditionError(f"duplicate route ids in dossier: {ids}")
    return Dossier(user_context or UserContext(), scenario_context or ScenarioContext(), tuple(tasks), annotations)
