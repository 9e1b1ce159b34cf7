"""Regenerate the bundled benchmark suite under src/pave/data/suite.

The network is a synthetic 8x5 city grid; POIs and scenarios are placed by
hand so each scenario has a well-defined oracle answer.
"""
from __future__ import annotations

import json
from pathlib import Path

from pave.geo import haversine_m

OUT = Path(__file__).resolve().parents[1] / "src" / "pave" / "data" / "suite"

ROWS, COLS = 5, 8
LON0, LAT0 = 6.100, 49.600
DLON, DLAT = 0.006, 0.0045


def node_id(r, c):
    return f"r{r}c{c}"


def coord(r, c):
    return LON0 + c * DLON, LAT0 + r * DLAT


def speed(a, b):
    (r1, c1), (r2, c2) = a, b
    if r1 == r2 == 0:
        return 80.0  # northern boulevard: fast, but dirtier
    if r1 == r2 == 2:
        return 50.0  # central avenue
    if c1 == c2 and c1 in (0, 7):
        return 50.0
    if r1 == r2 == 4:
        return 40.0
    return 30.0


def network():
    nodes, edges = [], []
    for r in range(ROWS):
        for c in range(COLS):
            lon, lat = coord(r, c)
            nodes.append({"id": node_id(r, c), "lon": round(lon, 6), "lat": round(lat, 6)})
    for r in range(ROWS):
        for c in range(COLS):
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 >= ROWS or c2 >= COLS:
                    continue
                a, b = (r, c), (r2, c2)
                length = round(haversine_m(*coord(r, c), *coord(r2, c2)), 1)
                v = speed(a, b)
                for s, t in ((a, b), (b, a)):
                    edges.append({
                        "id": f"{node_id(*s)}-{node_id(*t)}",
                        "from": node_id(*s),
                        "to": node_id(*t),
                        "length_m": length,
                        "speed_kmh": v,
                    })
    return {"nodes": nodes, "edges": edges}


def poi(pid, name, r, c, tags, dlon=0.0002, dlat=0.0001):
    lon, lat = coord(r, c)
    return {"id": pid, "name": name, "lon": round(lon + dlon, 6), "lat": round(lat + dlat, 6), "tags": tags}


FUEL = {"amenity": "fuel"}
MARKET = {"shop": "supermarket"}
PARK = {"leisure": "park"}
HOSPITAL = {"amenity": "hospital"}
PHARMACY = {"amenity": "pharmacy"}

SCHOOL = {"amenity": "school"}

POIS = [
    poi("park_central", "Central Park", 2, 3, PARK),
    poi("park_west", "West Garden", 2, 2, PARK),
    # sits between r2c5 and r1c5 but snaps to r1c5, off the central avenue
    poi("market_north", "North Market", 2, 5, MARKET, dlon=0.0, dlat=0.0026),
    poi("market_south", "South Market", 3, 5, MARKET),
    poi("pharmacy_mill", "Mill Pharmacy", 3, 2, PHARMACY),
    poi("fuel_boulevard", "Boulevard Fuel", 0, 4, FUEL),
    poi("fuel_west", "West Fuel", 3, 0, FUEL),
    poi("fuel_inner", "Inner Ring Fuel", 2, 2, FUEL, dlon=-0.0002, dlat=-0.0001),
    poi("hospital_central", "Central Hospital", 2, 4, HOSPITAL),
    poi("school_south", "South School", 4, 3, SCHOOL),
]


def scenario(name, family, origin, destination, tasks=(), preferences=(), avoid=(), time="08:30", traffic="MEDIUM", notes=""):
    return {
        "name": name,
        "family": family,
        "origin": origin,
        "destination": destination,
        "tasks": list(tasks),
        "preferences": list(preferences),
        "avoid": [{"kind": k, "value": v} for k, v in avoid],
        "context": {"time_of_day": time, "traffic": traffic, "notes": notes},
        "repetitions": 3,
        "k": 2,
    }


SCENARIOS = [
    scenario("simple_park_detour", "SIMPLE", "r0c0", "r4c7", ["I want to pass through a park on the way"], time="17:45"),
    scenario("simple_groceries", "SIMPLE", "r2c0", "r2c7", ["I'd like to stop at the supermarket"], time="18:10"),
    scenario("simple_park_and_groceries", "SIMPLE", "r1c1", "r3c6",
             ["I want to pass through a park on the way to the grocery store"], time="10:00", traffic="LOW"),
    scenario("simple_pharmacy", "SIMPLE", "r4c1", "r4c6", ["Stop by a pharmacy if it is convenient"], time="12:30"),
    scenario("urgency_fuel_boulevard", "URGENCY", "r0c0", "r4c7", ["I'm running out of gas"], time="07:50", traffic="HIGH"),
    scenario("urgency_fuel_shared", "URGENCY", "r4c0", "r0c7", ["My car is almost empty, I need fuel"], time="22:15", traffic="LOW"),
    scenario("urgency_hospital", "URGENCY", "r2c0", "r2c7", ["Emergency: I need to get to a hospital"], time="03:05", traffic="LOW"),
    scenario("urgency_fuel_then_groceries", "URGENCY", "r0c1", "r3c5",
             ["I need gas before going to the supermarket"], time="16:40"),
    scenario("avoid_boulevard_node", "AVOIDANCE", "r0c0", "r4c7", avoid=[("NODE", "r0c4")],
             notes="street festival on the northern boulevard"),
    scenario("avoid_avenue_node", "AVOIDANCE", "r2c0", "r2c7", avoid=[("NODE", "r2c3")], notes="roadworks on the avenue"),
    scenario("avoid_school_zone", "AVOIDANCE", "r1c0", "r4c5", avoid=[("TAG", "amenity=school")], time="08:00",
             traffic="HIGH", notes="school run"),
    scenario("avoid_node_with_park", "AVOIDANCE", "r3c0", "r1c7", ["I want to pass through a park on the way"],
             avoid=[("NODE", "r0c5")], time="14:20"),
    scenario("efficiency_south", "EFFICIENCY", "r4c1", "r4c6", preferences=["I prefer an eco-friendly route"]),
    scenario("efficiency_diagonal", "EFFICIENCY", "r1c1", "r3c6", preferences=["fastest possible"], traffic="HIGH"),
    scenario("efficiency_west_south", "EFFICIENCY", "r1c0", "r4c5", preferences=["low emissions"], time="19:00"),
    scenario("efficiency_cross", "EFFICIENCY", "r3c0", "r1c7", time="06:30", traffic="LOW"),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "scenarios").mkdir(exist_ok=True)
    (OUT / "network.json").write_text(json.dumps(network(), indent=1) + "\n")
    (OUT / "pois.json").write_text(json.dumps(POIS, indent=1) + "\n")
    for old in (OUT / "scenarios").glob("*.json"):
        old.unlink()
    for i, sc in enumerate(SCENARIOS):
        (OUT / "scenarios" / f"{i:02d}_{sc['name']}.json").write_text(json.dumps(sc, indent=2) + "\n")


if __name__ == "__main__":
    main()
