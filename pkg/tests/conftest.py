from __future__ import annotations

import pytest

from oracles import t3
from pave.bench import bundled_suite_dir, load_suite
from pave.poi_cache import pois_from_list


@pytest.fixture
def tri():
    return t3()


@pytest.fixture
def tri_fuel_b(tri):
    """T3 with one fuel station exactly on B."""
    cache = pois_from_list([{"id": "fuel_b", "name": "Fuel B", "lon": 6.015625, "lat": 49.5,
                             "tags": {"amenity": "fuel"}}], tri)
    return tri, cache


@pytest.fixture(scope="session")
def suite():
    return load_suite(bundled_suite_dir())


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
