from __future__ import annotations

import json
import random

import pytest

from dossiers import random_dossier, rescale_times
from pave.enrichment import AvoidRule, PoiHit, RouteAnnotation, UserContext, build_dossier
from pave.errors import InvalidDecisionError, SchemaError
from pave.evaluator import (
    NO_ACTION,
    Decision,
    RequiredAction,
    evaluate_deterministic,
    evaluate_llm,
    validate_decision,
)
from pave.llm_client import BackendConfig, LLMClient, RecordingClient
from pave.tasking import ClassifiedTask

FUEL = {"amenity": "fuel"}


def two_routes(**kw):
    a = RouteAnnotation(0, 200.0, 100.0, ("A", "B", "C"), **kw.get("r0", {}))
    b = RouteAnnotation(1, 250.0, 40.0, ("A", "C"), **kw.get("r1", {}))
    return [a, b]


def test_urgency_picks_fastest_reach():
    routes = [
        RouteAnnotation(0, 500.0, 100.0, ("A", "B", "C"), (), 100.0, "f0", "B"),
        RouteAnnotation(1, 300.0, 40.0, ("A", "D", "C"), (), 300.0, "f1", "D"),
    ]
    d = build_dossier(routes, tasks=[ClassifiedTask("running out of gas", "URGENT", FUEL)])
    dec = evaluate_deterministic(d)
    assert dec.chosen_route_id == 0
    assert dec.required_action == RequiredAction("ADD_WAYPOINT", "f0", "B")


def test_avoid_node_filter():
    d = build_dossier(two_routes(), UserContext((), (AvoidRule("NODE", "B"),)))
    assert evaluate_deterministic(d).chosen_route_id == 1


def test_time_before_co2():
    dec = evaluate_deterministic(build_dossier(two_routes()))
    assert dec.chosen_route_id == 0
    assert dec.required_action == NO_ACTION


def test_normal_task_coverage_and_waypoint():
    park = PoiHit("park", "Park", {"leisure": "park"}, 120.0, "P")
    routes = [
        RouteAnnotation(0, 200.0, 100.0, ("A", "B", "C")),
        RouteAnnotation(1, 260.0, 90.0, ("A", "D", "C"), (park,)),
    ]
    d = build_dossier(routes, tasks=[ClassifiedTask("walk in a park", "NORMAL", {"leisure": "park"})])
    dec = evaluate_deterministic(d)
    assert dec.chosen_route_id == 1
    assert dec.required_action == RequiredAction("ADD_WAYPOINT", "park", "P")
    # passing through the POI already: no waypoint needed
    routes[1] = RouteAnnotation(1, 260.0, 90.0, ("A", "P", "C"), (park,))
    assert evaluate_deterministic(build_dossier(routes, tasks=d.tasks)).required_action == NO_ACTION


def test_preferences_only_annotate():
    plain = build_dossier(two_routes())
    pref = build_dossier(two_routes(), UserContext(("scenic route",)))
    assert evaluate_deterministic(pref).chosen_route_id == evaluate_deterministic(plain).chosen_route_id
    assert "scenic route" in evaluate_deterministic(pref).justification


def test_validate():
    d = build_dossier(two_routes(r0={"poi_hits": (PoiHit("f", "F", FUEL, 0.0, "B"),)}))
    validate_decision(Decision(1, "ok"), d)
    validate_decision(Decision(0, "ok", RequiredAction("ADD_WAYPOINT", "f", "B")), d)
    for bad in (
        Decision(99, "no such route"),
        Decision(0, "x", RequiredAction("ADD_WAYPOINT", "f", None)),
        Decision(0, "x", RequiredAction("ADD_WAYPOINT", None, "B")),
        Decision(0, "x", RequiredAction("ADD_WAYPOINT", "f", "C")),
        Decision(0, "x", RequiredAction("ADD_WAYPOINT", "ghost", "B")),
        Decision(0, "x", RequiredAction("TELEPORT")),
    ):
        with pytest.raises(InvalidDecisionError):
            validate_decision(bad, d)


def test_llm_single_route():
    d = build_dossier([RouteAnnotation(0, 10.0, 1.0, ("a", "b"))])
    assert evaluate_llm(LLMClient(), d).chosen_route_id == 0


def test_llm_matches_deterministic_under_stub():
    rng = random.Random(8)
    for _ in range(50):
        d = random_dossier(rng)
        assert evaluate_llm(LLMClient(), d) == evaluate_deterministic(d)


def test_llm_invalid_route_id():
    reply = json.dumps({"chosen_route_id": 99, "justification": "x", "required_action": {"type": "NONE"}})
    client = LLMClient(responder=lambda m: reply)
    with pytest.raises(InvalidDecisionError):
        evaluate_llm(client, build_dossier(two_routes()))
    assert client.calls == 1


def test_llm_schema_failure_names_stage():
    client = LLMClient(BackendConfig("STUB", max_retries=2), responder=lambda m: '{"route": 0}')
    with pytest.raises(SchemaError) as info:
        evaluate_llm(client, build_dossier(two_routes()))
    assert info.value.stage == "evaluate"
    assert client.calls == 3


def test_replayed_decision_is_byte_stable(tmp_path):
    d = build_dossier(two_routes())
    reply = 'Route 1 is calmer.\n{"chosen_route_id": 1, "justification": "calmer", "required_action": {"type": "NONE", "poi_id": null, "node_id": null}}'
    recorder = RecordingClient(LLMClient(responder=lambda m: reply), tmp_path)
    first = evaluate_llm(recorder, d)
    replay = LLMClient(BackendConfig("REPLAY", fixture_dir=str(tmp_path)))
    second = evaluate_llm(replay, d)
    assert first == second == Decision(1, "calmer")
    assert second.to_json() == first.to_json()


def test_properties_on_random_dossiers():
    rng = random.Random(12)
    for _ in range(300):
        d = random_dossier(rng)
        dec = evaluate_deterministic(d)
        assert dec == evaluate_deterministic(d)
        validate_decision(dec, d)
        for c in (0.5, 3.0, 17.25):
            assert evaluate_deterministic(rescale_times(d, c)).chosen_route_id == dec.chosen_route_id
        avoided = d.user_context.avoided_nodes
        clean = [r for r in d.routes if not set(r.nodes) & avoided]
        chosen = d.route(dec.chosen_route_id)
        if clean:
            assert not set(chosen.nodes) & avoided
        if any(t.urgent for t in d.tasks):
            reach = [r.urgent_poi_time_s for r in clean or d.routes if r.urgent_poi_time_s is not None]
            if reach:
                assert chosen.urgent_poi_time_s == min(reach)


def test_decision_round_trip():
    dec = Decision(2, "why", RequiredAction("ADD_WAYPOINT", "p", "n"))
    assert Decision.from_dict(json.loads(dec.to_json())) == dec
