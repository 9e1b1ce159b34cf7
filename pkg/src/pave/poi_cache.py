"""Tagged points of interest snapped to graph nodes, with radius queries.

The uniform (lon, lat) grid only narrows the candidate set; every answer
is decided by an exact great-circle distance check, so results do not
depend on the cell size.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import EmptyGraphError, NetworkParseError, PreconditionError, ValidationError
from .geo import EARTH_RADIUS_M
from .pathfinding import Route
from .road_graph import Graph, nearest_node

DEFAULT_RADIUS_M = 300.0

# tag_filter value meaning "match every POI"
ANY = None


@dataclass(frozen=True)
class Poi:
    id: str
    name: str
    lon: float
    lat: float
    tags: Mapping[str, str]
    linked_node: str

    def __hash__(self):
        return hash(self.id)


def match_tags(poi: Poi, tag_filter: Mapping[str, str] | None) -> bool:
    """True iff every filter key is present on the POI with an equal value."""
    if tag_filter is ANY:
        return True
    tags = poi.tags
    return all(k in tags and tags[k] == v for k, v in tag_filter.items())


class PoiCache:
    def __init__(self, pois: Iterable[Poi], cell_radius_m: float = DEFAULT_RADIUS_M):
        self.pois: tuple[Poi, ...] = tuple(pois)
        self._by_id = MappingProxyType({p.id: p for p in self.pois})
        if len(self._by_id) != len(self.pois):
            raise ValidationError("duplicate POI id in cache")
        if not cell_radius_m > 0:
            raise PreconditionError("cell size must be positive")
        self.cell_deg = math.degrees(cell_radius_m / EARTH_RADIUS_M)
        self.lons = np.array([p.lon for p in self.pois], dtype=np.float64)
        self.lats = np.array([p.lat for p in self.pois], dtype=np.float64)
        grid: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i, p in enumerate(self.pois):
            grid[self._cell(p.lon, p.lat)].append(i)
        self._grid = {k: tuple(v) for k, v in grid.items()}

    def __len__(self):
        return len(self.pois)

    def get(self, poi_id: str) -> Poi:
        return self._by_id[poi_id]

    def _cell(self, lon, lat):
        return (math.floor(lon / self.cell_deg), math.floor(lat / self.cell_deg))

    def _candidates_near(self, lon: float, lat: float, radius_m: float):
        """Indices of POIs that may lie within radius_m of (lon, lat); None means all."""
        delta = radius_m / EARTH_RADIUS_M
        if not math.isfinite(delta) or delta >= math.pi / 2:
            return None
        dlat = math.degrees(delta)
        phi = math.radians(abs(lat) + dlat)
        if phi >= math.pi / 2:
            return None
        ratio = math.sin(delta) / math.cos(phi)
        if ratio >= 1.0:
            return None
        dlon = math.degrees(math.asin(ratio))
        # pad against rounding in the bound itself
        pad = 1e-9 + 1e-12 * max(abs(lon), abs(lat))
        lo_lon, hi_lon = lon - dlon - pad, lon + dlon + pad
        lo_lat, hi_lat = lat - dlat - pad, lat + dlat + pad
        if lo_lon < -180.0 or hi_lon > 180.0:
            return None
        x0, y0 = self._cell(lo_lon, lo_lat)
        x1, y1 = self._cell(hi_lon, hi_lat)
        if (x1 - x0 + 1) * (y1 - y0 + 1) > 4 * len(self._grid) + 16:
            return None
        out = []
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                out.extend(self._grid.get((x, y), ()))
        return out


def poi_from_dict(rec: Mapping, graph: Graph, where: str = "poi") -> Poi:
    if not isinstance(rec, Mapping):
        raise NetworkParseError(f"{where}: expected an object")
    pid = rec.get("id")
    if not isinstance(pid, str) or not pid:
        raise NetworkParseError(f"{where}: missing string 'id'")
    where = f"poi {pid!r}"
    for key in ("lon", "lat"):
        if isinstance(rec.get(key), bool) or not isinstance(rec.get(key), (int, float)):
            raise NetworkParseError(f"{where}: field {key!r} must be a number")
    tags = rec.get("tags")
    if not isinstance(tags, Mapping) or not all(isinstance(k, str) and isinstance(v, str) for k, v in tags.items()):
        raise NetworkParseError(f"{where}: 'tags' must map strings to strings")
    if not tags:
        raise ValidationError(f"{where}: tags must be non-empty")
    lon, lat = float(rec["lon"]), float(rec["lat"])
    if not (-180.0 <= lon <= 180.0) or not (-90.0 <= lat <= 90.0):
        raise ValidationError(f"{where}: coordinates out of range")
    name = rec.get("name") or pid
    return Poi(pid, str(name), lon, lat, MappingProxyType(dict(tags)), nearest_node(graph, lon, lat))


def pois_from_list(records, graph: Graph, cell_radius_m: float = DEFAULT_RADIUS_M) -> PoiCache:
    if len(graph) == 0:
        raise EmptyGraphError("POIs need a non-empty graph to snap to")
    if not isinstance(records, list):
        raise NetworkParseError("POI document must be a list")
    return PoiCache((poi_from_dict(r, graph, f"pois[{i}]") for i, r in enumerate(records)), cell_radius_m)


def load_pois(path, graph: Graph, cell_radius_m: float = DEFAULT_RADIUS_M) -> PoiCache:
    path = Path(path)
    try:
        records = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkParseError(f"{path}: malformed JSON ({exc})") from exc
    return pois_from_list(records, graph, cell_radius_m)


def query_radius_with_distance(
    cache: PoiCache,
    route: Route,
    graph: Graph,
    radius_m: float = DEFAULT_RADIUS_M,
    tag_filter: Mapping[str, str] | None = ANY,
) -> list[tuple[Poi, float]]:
    """(poi, distance_m) pairs within ``radius_m`` of the route's nodes.

    Distance is to the nearest route node (not to interpolated edge
    geometry). Sorted by distance, then POI id.
    """
    if not radius_m > 0:
        raise PreconditionError(f"radius_m must be > 0, got {radius_m}")
    if not cache.pois or not route.nodes:
        return []
    idx = [graph.index[n] for n in route.nodes]
    qlons = np.ascontiguousarray(graph.lons[idx])
    qlats = np.ascontiguousarray(graph.lats[idx])

    candidates: set[int] | None = set()
    for lon, lat in zip(qlons.tolist(), qlats.tolist()):
        near = cache._candidates_near(lon, lat, radius_m)
        if near is None:
            candidates = None
            break
        candidates.update(near)
    if candidates is None:
        pick = list(range(len(cache.pois)))
    else:
        pick = sorted(i for i in candidates if match_tags(cache.pois[i], tag_filter))
    if candidates is None and tag_filter is not ANY:
        pick = [i for i in pick if match_tags(cache.pois[i], tag_filter)]
    if not pick:
        return []
    dists = kernels.min_distances(
        np.ascontiguousarray(cache.lons[pick]), np.ascontiguousarray(cache.lats[pick]), qlons, qlats
    )
    hits = [(cache.pois[i], float(d)) for i, d in zip(pick, dists) if d <= radius_m]
    hits.sort(key=lambda h: (h[1], h[0].id))
    return hits


def query_radius(
    cache: PoiCache,
    route: Route,
    graph: Graph,
    radius_m: float = DEFAULT_RADIUS_M,
    tag_filter: Mapping[str, str] | None = ANY,
) -> list[Poi]:
    return [p for p, _ in query_radius_with_distance(cache, route, graph, radius_m, tag_filter)]
