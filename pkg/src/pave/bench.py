"""Scenario benchmark: oracle-best routes, accuracy/completeness, top-k sweep.

Accuracy counts trials whose chosen candidate equals the oracle's best
candidate; completeness counts trials whose final route passes through a
matching POI for every task. Percentages are rounded half-up to two
decimals.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .enrichment import AvoidRule, ScenarioContext
from .errors import NoPathError, PreconditionError
from .geo import haversine_m
from .orchestrator import PlanRequest, plan
from .pathfinding import TIME, CandidateSet, Route, k_candidates, shortest_path
from .poi_cache import DEFAULT_RADIUS_M, PoiCache, load_pois, match_tags
from .road_graph import Graph, load_network
from .tasking import keyword_classify

log = logging.getLogger(__name__)

FAMILIES = ("SIMPLE", "URGENCY", "AVOIDANCE", "EFFICIENCY")
DEFAULT_KS = (1, 3, 5, 10, 20)
CSV_COLUMNS = ("k", "family", "accuracy_pct", "completeness_pct", "n_trials")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    family: str
    origin: str
    destination: str
    tasks: tuple[str, ...] = ()
    preferences: tuple[str, ...] = ()
    avoid: tuple[AvoidRule, ...] = ()
    context: ScenarioContext = field(default_factory=ScenarioContext)
    repetitions: int = 3
    k: int = 2
    radius_m: float = DEFAULT_RADIUS_M

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"{self.name}: family must be one of {FAMILIES}")
        if self.repetitions < 1:
            raise PreconditionError(f"{self.name}: repetitions must be >= 1")
        if self.k < 1:
            raise PreconditionError(f"{self.name}: k must be >= 1")

    @classmethod
    def from_dict(cls, d) -> "ScenarioSpec":
        return cls(
            name=d["name"],
            family=d["family"],
            origin=d["origin"],
            destination=d["destination"],
            tasks=tuple(d.get("tasks", ())),
            preferences=tuple(d.get("preferences", ())),
            avoid=tuple(AvoidRule(a["kind"], a["value"]) for a in d.get("avoid", ())),
            context=ScenarioContext.from_dict(d.get("context", {})),
            repetitions=int(d.get("repetitions", 3)),
            k=int(d.get("k", 2)),
            radius_m=float(d.get("radius_m", DEFAULT_RADIUS_M)),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "origin": self.origin,
            "destination": self.destination,
            "tasks": list(self.tasks),
            "preferences": list(self.preferences),
            "avoid": [a.to_dict() for a in self.avoid],
            "context": self.context.to_dict(),
            "repetitions": self.repetitions,
            "k": self.k,
            "radius_m": self.radius_m,
        }

    def request(self, mode: str) -> PlanRequest:
        return PlanRequest(self.origin, self.destination, self.tasks, self.preferences, self.avoid,
                           self.k, self.context, mode, self.radius_m)


@dataclass(frozen=True)
class TrialResult:
    scenario: str
    family: str
    repetition: int
    chosen_route_id: int | None
    oracle_route_id: int
    route_correct: bool
    tasks_completed: bool
    final_route: Route | None
    error: str | None = None


@dataclass(frozen=True)
class ReportRow:
    k: int
    family: str
    accuracy_pct: float
    completeness_pct: float
    n_trials: int


@dataclass(frozen=True)
class BenchReport:
    k: int | None
    rows: tuple[ReportRow, ...]
    trials: tuple[TrialResult, ...] = field(default=(), compare=False, repr=False)

    def row(self, family: str) -> ReportRow:
        for r in self.rows:
            if r.family == family:
                return r
        raise KeyError(family)

    @property
    def overall(self) -> ReportRow:
        return self.row("OVERALL")


# ---------------------------------------------------------------------------
# oracle


def _near(cache: PoiCache, graph: Graph, route: Route, radius_m: float, tags) -> list:
    """Brute-force scan: POIs matching ``tags`` within radius of any route node."""
    coords = [(graph.nodes[n].lon, graph.nodes[n].lat) for n in route.nodes]
    return [
        p for p in cache.pois
        if match_tags(p, tags) and min(haversine_m(p.lon, p.lat, x, y) for x, y in coords) <= radius_m
    ]


def _violates(spec: ScenarioSpec, graph: Graph, cache: PoiCache, route: Route) -> bool:
    for rule in spec.avoid:
        if rule.kind == "NODE" and rule.value in route.nodes:
            return True
        if rule.kind == "TAG" and _near(cache, graph, route, spec.radius_m, rule.tag_filter):
            return True
    return False


def _detour_time(graph: Graph, s: str, node: str, d: str, memo: dict) -> float | None:
    if node not in memo:
        try:
            memo[node] = shortest_path(graph, s, node, TIME).total_time_s + shortest_path(graph, node, d, TIME).total_time_s
        except NoPathError:
            memo[node] = None
    return memo[node]


def oracle_best(graph: Graph, cache: PoiCache, spec: ScenarioSpec, candidates: CandidateSet | None = None) -> int:
    """Ground-truth best candidate id for a scenario.

    Avoidance rules filter first (all routes kept if every one violates).
    For task scenarios the best candidate minimizes the fastest
    origin -> POI -> destination completion over POIs it passes near
    (urgent tasks take precedence over normal ones); otherwise, and for the
    EFFICIENCY family, the fastest then cleanest candidate wins.
    """
    if candidates is None:
        candidates = k_candidates(graph, spec.origin, spec.destination, spec.k)
    routes = list(candidates)
    allowed = [r for r in routes if not _violates(spec, graph, cache, r)] or routes

    tasks = keyword_classify(spec.tasks)
    urgent = [t for t in tasks if t.urgent]
    relevant = urgent or tasks
    if spec.family == "EFFICIENCY" or not relevant:
        return min(allowed, key=lambda r: (r.total_time_s, r.total_co2_g, r.id)).id

    memo: dict = {}

    def score(r: Route):
        missing = 0
        total = 0.0
        for t in relevant:
            times = [
                x for x in (_detour_time(graph, spec.origin, p.linked_node, spec.destination, memo)
                            for p in _near(cache, graph, r, spec.radius_m, t.osm_tags))
                if x is not None
            ]
            if times:
                total += min(times)
            else:
                missing += 1
        return (missing, total, r.total_time_s, r.total_co2_g, r.id)

    return min(allowed, key=score).id


def tasks_completed(spec: ScenarioSpec, cache: PoiCache, route: Route) -> bool:
    on_route = set(route.nodes)
    return all(
        any(match_tags(p, t.osm_tags) and p.linked_node in on_route for p in cache.pois)
        for t in keyword_classify(spec.tasks)
    )


# ---------------------------------------------------------------------------
# running


def run_scenario(spec: ScenarioSpec, graph: Graph, cache: PoiCache, client, mode: str) -> list[TrialResult]:
    oracle = oracle_best(graph, cache, spec)
    out = []
    for rep in range(spec.repetitions):
        try:
            result = plan(spec.request(mode), graph, cache, client)
        except Exception as exc:
            log.warning("%s trial %d failed: %s", spec.name, rep, exc)
            out.append(TrialResult(spec.name, spec.family, rep, None, oracle, False, False, None, str(exc)))
            continue
        chosen = result.decision.chosen_route_id
        out.append(TrialResult(
            spec.name, spec.family, rep, chosen, oracle, chosen == oracle,
            tasks_completed(spec, cache, result.final_route), result.final_route,
        ))
    return out


def pct(count: int, total: int) -> float:
    value = (Decimal(100 * count) / Decimal(total)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(value)


def metrics(trials: Sequence[TrialResult]) -> tuple[float, float]:
    if not trials:
        raise PreconditionError("metrics need at least one trial")
    n = len(trials)
    return (pct(sum(t.route_correct for t in trials), n), pct(sum(t.tasks_completed for t in trials), n))


def summarize(trials: Sequence[TrialResult], k: int | None) -> BenchReport:
    rows = []
    for fam in FAMILIES:
        sub = [t for t in trials if t.family == fam]
        if sub:
            acc, comp = metrics(sub)
            rows.append(ReportRow(k, fam, acc, comp, len(sub)))
    acc, comp = metrics(trials)
    rows.append(ReportRow(k, "OVERALL", acc, comp, len(trials)))
    return BenchReport(k, tuple(rows), tuple(trials))


def run_suite(specs: Sequence[ScenarioSpec], graph: Graph, cache: PoiCache, client, mode: str,
              k: int | None = None, jobs: int = 1) -> BenchReport:
    """Run every scenario (optionally overriding k) and summarize."""
    specs = [replace(s, k=k) if k is not None else s for s in specs]
    if not specs:
        raise PreconditionError("no scenarios to run")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda s: run_scenario(s, graph, cache, client, mode), specs))
    else:
        chunks = [run_scenario(s, graph, cache, client, mode) for s in specs]
    return summarize([t for c in chunks for t in c], k)


def k_sweep(specs, graph, cache, client, mode, ks: Iterable[int] = DEFAULT_KS, jobs: int = 1) -> list[BenchReport]:
    return [run_suite(specs, graph, cache, client, mode, k=k, jobs=jobs) for k in ks]


# ---------------------------------------------------------------------------
# I/O


def render_report_csv(reports: Iterable[BenchReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        for r in rep.rows:
            writer.writerow([r.k if r.k is not None else "", r.family, f"{r.accuracy_pct:.2f}",
                             f"{r.completeness_pct:.2f}", r.n_trials])
    return buf.getvalue()


def parse_report_csv(text: str) -> list[BenchReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected report columns {reader.fieldnames}")
    grouped: dict = {}
    for rec in reader:
        k = int(rec["k"]) if rec["k"] else None
        grouped.setdefault(k, []).append(ReportRow(
            k, rec["family"], float(rec["accuracy_pct"]), float(rec["completeness_pct"]), int(rec["n_trials"])
        ))
    return [BenchReport(k, tuple(rows)) for k, rows in grouped.items()]


def render_sweep_table(columns: dict[str, Sequence[BenchReport]]) -> str:
    """Wide k-sweep table: one row per k, accuracy/completeness per configuration."""
    labels = list(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k"] + [f"{lab}_{m}" for lab in labels for m in ("accuracy_pct", "completeness_pct")])
    ks = [rep.k for rep in columns[labels[0]]]
    for i, k in enumerate(ks):
        row = [k]
        for lab in labels:
            o = columns[lab][i].overall
            row += [f"{o.accuracy_pct:.2f}", f"{o.completeness_pct:.2f}"]
        writer.writerow(row)
    return buf.getvalue()


def load_scenarios(directory) -> list[ScenarioSpec]:
    paths = sorted(Path(directory).glob("*.json"))
    return [ScenarioSpec.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]


def load_suite(directory) -> tuple[Graph, PoiCache, list[ScenarioSpec]]:
    """A suite directory holds network.json, pois.json and scenarios/*.json."""
    directory = Path(directory)
    graph = load_network(directory / "network.json")
    cache = load_pois(directory / "pois.json", graph)
    return graph, cache, load_scenarios(directory / "scenarios")


def bundled_suite_dir() -> Path:
    return Path(__file__).parent / "data" / "suite"
