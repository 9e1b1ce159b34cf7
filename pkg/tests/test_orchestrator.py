from __future__ import annotations

import pytest

from pave.enrichment import AvoidRule
from pave.errors import NoPathError, PreconditionError, StageError, UnknownNodeError
from pave.evaluator import Decision, RequiredAction
from pave.llm_client import BackendConfig, LLMClient
from pave.orchestrator import PlanRequest, apply_action, plan, route_geojson
from pave.pathfinding import k_candidates, shortest_path


def test_no_tasks_time_optimal(tri_fuel_b):
    g, cache = tri_fuel_b
    calls = LLMClient()
    result = plan(PlanRequest("A", "C", k=2), g, cache, calls)
    assert result.final_route.nodes == ("A", "B", "C")
    assert result.recalculated is False
    assert result.final_route == result.candidates[result.decision.chosen_route_id]
    assert calls.calls == 0  # empty task list skips classification


@pytest.mark.parametrize("mode", ["DETERMINISTIC", "LLM"])
def test_urgent_fuel_adds_waypoint(tri_fuel_b, mode):
    g, cache = tri_fuel_b
    result = plan(PlanRequest("A", "C", ("I'm running out of gas",), k=2, evaluator_mode=mode), g, cache)
    assert result.decision.required_action == RequiredAction("ADD_WAYPOINT", "fuel_b", "B")
    assert result.final_route.nodes == ("A", "B", "C")
    assert result.recalculated is True


def test_request_preconditions():
    with pytest.raises(PreconditionError):
        PlanRequest("A", "A")
    with pytest.raises(PreconditionError):
        PlanRequest("A", "C", k=0)
    with pytest.raises(PreconditionError):
        PlanRequest("A", "C", evaluator_mode="ORACLE")


def test_unknown_node(tri_fuel_b):
    g, cache = tri_fuel_b
    with pytest.raises(UnknownNodeError):
        plan(PlanRequest("A", "Q"), g, cache)


def test_apply_action(tri):
    req = PlanRequest("A", "C")
    cands = k_candidates(tri, "A", "C", 2)
    assert apply_action(req, tri, Decision(1, ""), cands) == cands[1]
    r = apply_action(req, tri, Decision(1, "", RequiredAction("ADD_WAYPOINT", "p", "B")), cands)
    assert r.nodes == ("A", "B", "C") and r.id == 1
    with pytest.raises(NoPathError):
        # C has no outgoing edges, so A -> C -> ... never returns
        apply_action(PlanRequest("A", "B"), tri, Decision(0, "", RequiredAction("ADD_WAYPOINT", "p", "C")), k_candidates(tri, "A", "B", 1))


def test_stage_errors_are_labelled(tri_fuel_b):
    g, cache = tri_fuel_b
    client = LLMClient(BackendConfig("STUB", max_retries=0), responder=lambda m: "no idea")
    with pytest.raises(StageError) as info:
        plan(PlanRequest("A", "C", ("need gas",)), g, cache, client)
    assert info.value.stage == "classify"


def test_avoid_node_honoured_in_recalculation(suite):
    g, cache, _ = suite
    req = PlanRequest("r0c0", "r4c7", ("visit a park",), avoid=(AvoidRule("NODE", "r2c1"),), k=3)
    result = plan(req, g, cache)
    assert "r2c1" not in result.final_route.nodes
    assert result.final_route.nodes[0] == "r0c0" and result.final_route.nodes[-1] == "r4c7"


def test_plan_is_deterministic_and_consistent(suite):
    g, cache, specs = suite
    for spec in specs:
        for mode in ("DETERMINISTIC", "LLM"):
            a = plan(spec.request(mode), g, cache)
            b = plan(spec.request(mode), g, cache)
            assert a.to_dict() == b.to_dict()
            r = a.final_route
            assert r.nodes[0] == spec.origin and r.nodes[-1] == spec.destination
            act = a.decision.required_action
            if act.type == "ADD_WAYPOINT":
                assert a.recalculated and act.node_id in r.nodes
            else:
                assert not a.recalculated and r == a.candidates[a.decision.chosen_route_id]


def test_geojson(tri):
    gj = route_geojson(shortest_path(tri, "A", "C"), tri)
    assert gj["geometry"]["type"] == "LineString"
    assert gj["geometry"]["coordinates"] == [[6.0, 49.5], [6.015625, 49.5], [6.015625, 49.515625]]
