"""End-to-end planning: classify, generate, enrich, evaluate, recalculate."""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Sequence

from .enrichment import (
    AvoidRule,
    Dossier,
    ScenarioContext,
    UserContext,
    annotate_route,
    build_dossier,
)
from .errors import NoPathError, PreconditionError, StageError, UnknownNodeError
from .evaluator import Decision, evaluate_deterministic, evaluate_llm, validate_decision
from .llm_client import BackendConfig, LLMClient
from .pathfinding import CandidateSet, Route, concat_via_waypoint, k_candidates
from .poi_cache import DEFAULT_RADIUS_M, PoiCache
from .road_graph import Graph
from .tasking import ClassifiedTask, classify_tasks

log = logging.getLogger(__name__)

EVALUATOR_MODES = ("LLM", "DETERMINISTIC")


@dataclass(frozen=True)
class PlanRequest:
    origin: str
    destination: str
    tasks: tuple[str, ...] = ()
    preferences: tuple[str, ...] = ()
    avoid: tuple[AvoidRule, ...] = ()
    k: int = 2
    scenario_context: ScenarioContext = field(default_factory=ScenarioContext)
    evaluator_mode: str = "DETERMINISTIC"
    radius_m: float = DEFAULT_RADIUS_M

    def __post_init__(self):
        if self.origin == self.destination:
            raise PreconditionError("origin and destination must differ")
        if self.k < 1:
            raise PreconditionError(f"k must be >= 1, got {self.k}")
        if self.evaluator_mode not in EVALUATOR_MODES:
            raise PreconditionError(f"evaluator_mode must be LLM or DETERMINISTIC, got {self.evaluator_mode!r}")
        if not self.radius_m > 0:
            raise PreconditionError("radius_m must be > 0")

    @property
    def user_context(self) -> UserContext:
        return UserContext(tuple(self.preferences), tuple(self.avoid))


@dataclass(frozen=True)
class FinalPlan:
    final_route: Route
    decision: Decision
    candidates: CandidateSet
    dossier: Dossier
    recalculated: bool
    tasks: tuple[ClassifiedTask, ...] = ()

    def to_dict(self) -> dict:
        return {
            "final_route": self.final_route.to_dict(),
            "decision": self.decision.to_dict(),
            "recalculated": self.recalculated,
            "candidates": [r.to_dict() for r in self.candidates],
            "k_requested": self.candidates.k_requested,
            "dossier": self.dossier.to_dict(),
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def apply_action(request: PlanRequest, graph: Graph, decision: Decision, candidates: CandidateSet) -> Route:
    """Turn a validated decision into the route to drive.

    A waypoint triggers one origin -> waypoint -> destination recalculation
    that stays off avoided nodes whenever that is still feasible.
    """
    action = decision.required_action
    if action.type != "ADD_WAYPOINT":
        return candidates[decision.chosen_route_id]
    s, w, d = request.origin, action.node_id, request.destination
    excluded = request.user_context.avoided_nodes - {s, w, d}
    try:
        route = concat_via_waypoint(graph, s, w, d, excluded)
    except NoPathError:
        if not excluded:
            raise
        log.info("waypoint %s unreachable while avoiding %s; retrying without exclusions", w, sorted(excluded))
        route = concat_via_waypoint(graph, s, w, d)
    return replace(route, id=decision.chosen_route_id)


def plan(request: PlanRequest, graph: Graph, cache: PoiCache, client=None) -> FinalPlan:
    for nid in (request.origin, request.destination):
        if nid not in graph:
            raise UnknownNodeError(nid)
    if client is None:
        client = LLMClient(BackendConfig("STUB"))

    tasks: list[ClassifiedTask] = []
    if request.tasks:
        with _stage("classify"):
            tasks = classify_tasks(client, list(request.tasks))

    with _stage("candidates"):
        candidates = k_candidates(graph, request.origin, request.destination, request.k)

    with _stage("enrich"):
        annotations = [annotate_route(r, graph, cache, tasks, request.radius_m, request.avoid) for r in candidates]
        dossier = build_dossier(annotations, request.user_context, request.scenario_context, tasks)

    with _stage("evaluate"):
        if request.evaluator_mode == "LLM":
            decision = evaluate_llm(client, dossier)
        else:
            decision = evaluate_deterministic(dossier)

    with _stage("validate"):
        validate_decision(decision, dossier)

    # single feedback iteration: at most one waypoint per plan
    with _stage("feedback"):
        final = apply_action(request, graph, decision, candidates)

    return FinalPlan(final, decision, candidates, dossier, decision.required_action.type == "ADD_WAYPOINT", tuple(tasks))


def route_geojson(route: Route, graph: Graph) -> dict:
    coords = [[graph.nodes[n].lon, graph.nodes[n].lat] for n in route.nodes]
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "route_id": route.id,
            "nodes": list(route.nodes),
            "total_time_s": route.total_time_s,
            "total_co2_g": route.total_co2_g,
        },
    }
