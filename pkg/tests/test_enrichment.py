from __future__ import annotations

import random

import pytest

from dossiers import random_dossier
from oracles import radius_filter
from pave.bench import bundled_suite_dir, load_suite
from pave.enrichment import (
    AvoidRule,
    Dossier,
    RouteAnnotation,
    ScenarioContext,
    UserContext,
    annotate_route,
    build_dossier,
)
from pave.errors import PreconditionError
from pave.pathfinding import TIME, concat_via_waypoint, k_candidates, shortest_path
from pave.tasking import ClassifiedTask

FUEL_URGENT = ClassifiedTask("I'm running out of gas", "URGENT", {"amenity": "fuel"})


def test_no_tasks(tri_fuel_b):
    g, cache = tri_fuel_b
    a = annotate_route(shortest_path(g, "A", "C"), g, cache, [])
    assert a.poi_hits == ()
    assert a.urgent_poi_time_s is None and a.urgent_poi_id is None and a.urgent_poi_node_id is None


def test_urgent_time_from_origin(tri_fuel_b):
    g, cache = tri_fuel_b
    a = annotate_route(shortest_path(g, "A", "C"), g, cache, [FUEL_URGENT])
    assert (a.urgent_poi_time_s, a.urgent_poi_id, a.urgent_poi_node_id) == (100.0, "fuel_b", "B")
    direct = shortest_path(g, "A", "C", excluded_nodes={"B"})
    a = annotate_route(direct, g, cache, [FUEL_URGENT])
    assert a.urgent_poi_time_s is None and a.urgent_poi_id is None


def test_normal_hits(tri_fuel_b):
    g, cache = tri_fuel_b
    task = ClassifiedTask("fuel", "NORMAL", {"amenity": "fuel"})
    a = annotate_route(shortest_path(g, "A", "C"), g, cache, [task])
    assert [(h.poi_id, h.distance_m, h.node_id) for h in a.poi_hits] == [("fuel_b", 0.0, "B")]


def test_avoid_tag_hits(tri_fuel_b):
    g, cache = tri_fuel_b
    a = annotate_route(shortest_path(g, "A", "C"), g, cache, [], avoid=[AvoidRule("TAG", "amenity=fuel")])
    assert a.avoid_hits == ("fuel_b",)


def test_minimal_and_ordered_dossier():
    d = build_dossier([RouteAnnotation(0, 1.0, 1.0, ("a", "b"))])
    assert d.tasks == () and d.user_context == UserContext()
    d2 = build_dossier([RouteAnnotation(0, 1.0, 1.0, ("a", "b")), RouteAnnotation(1, 2.0, 1.0, ("a", "c", "b"))])
    assert [r.route_id for r in d2.routes] == [0, 1]
    with pytest.raises(PreconditionError):
        build_dossier([])
    with pytest.raises(PreconditionError):
        build_dossier([RouteAnnotation(0, 1.0, 1.0, ("a",)), RouteAnnotation(0, 1.0, 1.0, ("b",))])


def test_round_trip_and_determinism():
    rng = random.Random(4)
    for _ in range(50):
        d = random_dossier(rng)
        assert Dossier.from_json(d.to_json()) == d
        assert Dossier.from_json(d.to_json()).to_json() == d.to_json()


def test_context_validation():
    with pytest.raises(PreconditionError):
        ScenarioContext("25:00")
    with pytest.raises(PreconditionError):
        ScenarioContext("08:00", "JAMMED")
    with pytest.raises(PreconditionError):
        AvoidRule("AREA", "x")
    with pytest.raises(PreconditionError):
        AvoidRule("TAG", "amenity")
    with pytest.raises(PreconditionError):
        RouteAnnotation(0, 1.0, 1.0, ("a",), (), 5.0, None, None)
    assert len(ScenarioContext.now().time_of_day) == 5


def test_annotations_match_bruteforce_on_suite(suite):
    g, cache, specs = suite
    tasks = [ClassifiedTask("park", "NORMAL", {"leisure": "park"}),
             ClassifiedTask("groceries", "NORMAL", {"shop": "supermarket"}),
             ClassifiedTask("gas", "URGENT", {"amenity": "fuel"})]
    for spec in specs:
        for r in k_candidates(g, spec.origin, spec.destination, 3):
            a = annotate_route(r, g, cache, tasks, 300.0)
            want = set()
            for t in tasks[:2]:
                want |= radius_filter(cache.pois, g, r.nodes, 300.0, t.osm_tags)
            assert {h.poi_id for h in a.poi_hits} == want
            assert [h.distance_m for h in a.poi_hits] == sorted(h.distance_m for h in a.poi_hits)
            fuel = radius_filter(cache.pois, g, r.nodes, 300.0, {"amenity": "fuel"})
            if not fuel:
                assert a.urgent_poi_time_s is None
                continue
            best = min(shortest_path(g, spec.origin, cache.get(p).linked_node, TIME).total_time_s for p in fuel)
            assert a.urgent_poi_time_s == best
            completion = concat_via_waypoint(g, spec.origin, a.urgent_poi_node_id, spec.destination)
            assert 0 <= a.urgent_poi_time_s <= completion.total_time_s
