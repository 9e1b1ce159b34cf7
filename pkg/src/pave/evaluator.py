"""Route selection: LLM-backed and deterministic, sharing one decision schema.

The deterministic evaluator applies a fixed hierarchy:
avoidance filter, urgency, task coverage, then travel time, CO2 and id.
Preferences are reported in the justification but never reorder routes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .enrichment import Dossier, RouteAnnotation
from .errors import InvalidDecisionError
from .tasking import EVALUATE, ask_structured, render_prompt

ACTION_TYPES = ("NONE", "ADD_WAYPOINT")

DECISION_SCHEMA = {
    "type": "object",
    "required": ["chosen_route_id", "justification", "required_action"],
    "additionalProperties": False,
    "properties": {
        "chosen_route_id": {"type": "integer"},
        "justification": {"type": "string"},
        "required_action": {
            "type": "object",
            "required": ["type"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": list(ACTION_TYPES)},
                "poi_id": {"type": ["string", "null"]},
                "node_id": {"type": ["string", "null"]},
            },
        },
    },
}


@dataclass(frozen=True)
class RequiredAction:
    type: str = "NONE"
    poi_id: str | None = None
    node_id: str | None = None

    def to_dict(self):
        return {"type": self.type, "poi_id": self.poi_id, "node_id": self.node_id}


NO_ACTION = RequiredAction()


@dataclass(frozen=True)
class Decision:
    chosen_route_id: int
    justification: str
    required_action: RequiredAction = field(default=NO_ACTION)

    def to_dict(self):
        return {
            "chosen_route_id": self.chosen_route_id,
            "justification": self.justification,
            "required_action": self.required_action.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d) -> "Decision":
        a = d.get("required_action") or {}
        return cls(int(d["chosen_route_id"]), d.get("justification", ""),
                   RequiredAction(a.get("type", "NONE"), a.get("poi_id"), a.get("node_id")))


def _efficiency(r: RouteAnnotation):
    return (r.total_time_s, r.total_co2_g, r.route_id)


def violates_avoid(route: RouteAnnotation, dossier: Dossier) -> bool:
    nodes = dossier.user_context.avoided_nodes
    if nodes and any(n in nodes for n in route.nodes):
        return True
    return bool(route.avoid_hits)


def _matches(tags, wanted) -> bool:
    return all(k in tags and tags[k] == v for k, v in wanted.items())


def _coverage(route: RouteAnnotation, tasks) -> int:
    return sum(1 for t in tasks if any(_matches(h.tags, t.osm_tags) for h in route.poi_hits))


def evaluate_deterministic(dossier: Dossier) -> Decision:
    notes = []
    allowed = [r for r in dossier.routes if not violates_avoid(r, dossier)]
    if not allowed:
        allowed = list(dossier.routes)
        notes.append("every route violates an avoid rule, so none was dropped")
    elif len(allowed) < len(dossier.routes):
        dropped = sorted(r.route_id for r in dossier.routes if r not in allowed)
        notes.append(f"routes {dropped} dropped by avoid rules")

    urgent = [t for t in dossier.tasks if t.urgent]
    normal = [t for t in dossier.tasks if not t.urgent]
    action = NO_ACTION
    chosen = None

    if urgent:
        reachable = [r for r in allowed if r.urgent_poi_time_s is not None]
        if reachable:
            chosen = min(reachable, key=lambda r: (r.urgent_poi_time_s,) + _efficiency(r))
            action = RequiredAction("ADD_WAYPOINT", chosen.urgent_poi_id, chosen.urgent_poi_node_id)
            notes.append(
                f"urgent stop {chosen.urgent_poi_id} reachable in {chosen.urgent_poi_time_s:.0f} s, the fastest option"
            )
        else:
            notes.append("no urgent place lies near any route")

    if chosen is None and normal:
        best_cov = max(_coverage(r, normal) for r in allowed)
        pool = [r for r in allowed if _coverage(r, normal) == best_cov]
        chosen = min(pool, key=_efficiency)
        on_route = set(chosen.nodes)
        missing = [
            t for t in normal
            if not any(_matches(h.tags, t.osm_tags) and h.node_id in on_route for h in chosen.poi_hits)
        ]
        stops = [h for h in chosen.poi_hits if any(_matches(h.tags, t.osm_tags) for t in missing)]
        notes.append(f"route covers {best_cov} of {len(normal)} task(s) nearby")
        if stops:
            stop = min(stops, key=lambda h: (h.distance_m, h.poi_id))
            action = RequiredAction("ADD_WAYPOINT", stop.poi_id, stop.node_id)
            notes.append(f"adding {stop.name} ({stop.poi_id}) as a waypoint")

    if chosen is None:
        chosen = min(allowed, key=_efficiency)
        notes.append("chosen on travel time, then CO2")

    if dossier.user_context.preferences:
        notes.append("preferences noted: " + "; ".join(dossier.user_context.preferences))
    text = f"Route {chosen.route_id}: {chosen.total_time_s:.0f} s, {chosen.total_co2_g:.0f} g CO2. " + "; ".join(notes) + "."
    return Decision(chosen.route_id, text, action)


def _known_pois(dossier: Dossier) -> dict[str, str]:
    known = {}
    for r in dossier.routes:
        for h in r.poi_hits:
            known[h.poi_id] = h.node_id
        if r.urgent_poi_id is not None:
            known[r.urgent_poi_id] = r.urgent_poi_node_id
    return known


def decision_violations(decision: Decision, dossier: Dossier) -> list[str]:
    problems = []
    if dossier.route(decision.chosen_route_id) is None:
        problems.append(f"chosen_route_id {decision.chosen_route_id} is not a dossier route")
    action = decision.required_action
    if action.type not in ACTION_TYPES:
        problems.append(f"unknown action type {action.type!r}")
    elif action.type == "ADD_WAYPOINT":
        if not action.poi_id:
            problems.append("ADD_WAYPOINT without poi_id")
        if not action.node_id:
            problems.append("ADD_WAYPOINT without node_id")
        if action.poi_id and action.node_id:
            known = _known_pois(dossier)
            if action.poi_id not in known:
                problems.append(f"poi_id {action.poi_id!r} does not appear in the dossier")
            elif known[action.poi_id] != action.node_id:
                problems.append(
                    f"node_id {action.node_id!r} is not the linked node {known[action.poi_id]!r} of {action.poi_id!r}"
                )
    return problems


def validate_decision(decision: Decision, dossier: Dossier) -> None:
    problems = decision_violations(decision, dossier)
    if problems:
        raise InvalidDecisionError(problems)


def evaluate_llm(client, dossier: Dossier) -> Decision:
    messages = render_prompt(EVALUATE, {"dossier": dossier})
    value = ask_structured(client, messages, "evaluate", dict, DECISION_SCHEMA)
    decision = Decision.from_dict(value)
    validate_decision(decision, dossier)
    return decision
