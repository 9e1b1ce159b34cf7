"""Command line entry point: ``pave route``, ``pave classify``, ``pave bench``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .bench import DEFAULT_KS, bundled_suite_dir, k_sweep, load_suite, render_report_csv, render_sweep_table
from .enrichment import AvoidRule, ScenarioContext
from .errors import PaveError
from .llm_client import BackendConfig, LLMClient, RecordingClient
from .orchestrator import PlanRequest, plan, route_geojson
from .poi_cache import DEFAULT_RADIUS_M, load_pois
from .road_graph import load_network
from .tasking import aggregate_tags, classify_tasks

log = logging.getLogger("pave")

MODES = {"llm": "LLM", "det": "DETERMINISTIC"}


def _add_backend_args(p: argparse.ArgumentParser):
    p.add_argument("--backend", choices=["stub", "replay", "http"], default="stub")
    p.add_argument("--fixture-dir", help="recorded replies for --backend replay")
    p.add_argument("--record", metavar="DIR", help="also write every reply as a replay fixture into DIR")
    p.add_argument("--max-retries", type=int, default=3)


def _client(args):
    kind = args.backend.upper()
    if kind == "HTTP":
        config = BackendConfig.from_env("HTTP", max_retries=args.max_retries)
    else:
        config = BackendConfig(kind, fixture_dir=args.fixture_dir, max_retries=args.max_retries)
    client = LLMClient(config)
    if args.record:
        return RecordingClient(client, args.record)
    return client


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("every k must be >= 1")
    return ks


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def cmd_route(args) -> int:
    graph = load_network(args.net)
    cache = load_pois(args.pois, graph)
    avoid = [AvoidRule("NODE", n) for n in args.avoid_node] + [AvoidRule("TAG", t) for t in args.avoid_tag]
    ctx = ScenarioContext(args.time_of_day, args.traffic) if args.time_of_day else ScenarioContext.now(args.traffic)
    request = PlanRequest(
        origin=args.origin,
        destination=args.destination,
        tasks=tuple(args.task),
        preferences=tuple(args.prefer),
        avoid=tuple(avoid),
        k=args.k,
        scenario_context=ctx,
        evaluator_mode=MODES[args.mode],
        radius_m=args.radius_m,
    )
    result = plan(request, graph, cache, _client(args))
    _write(args.out, json.dumps(result.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
    if args.geojson:
        _write(args.geojson, json.dumps(route_geojson(result.final_route, graph), indent=2))
    r = result.final_route
    print(f"route {r.id}: {' -> '.join(r.nodes)} ({r.total_time_s:.1f} s, {r.total_co2_g:.1f} g CO2)", file=sys.stderr)
    return 0


def cmd_classify(args) -> int:
    client = _client(args)
    tasks = classify_tasks(client, args.task)
    out = {"tasks": [t.to_dict() for t in tasks]}
    if args.aggregate:
        out["osm_tags"] = aggregate_tags(client, args.task).tags
    print(json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False))
    return 0


def cmd_bench(args) -> int:
    graph, cache, specs = load_suite(args.suite or bundled_suite_dir())
    modes = [MODES[m] for m in (["det", "llm"] if args.mode == "both" else [args.mode])]
    columns = {}
    for mode in modes:
        t0 = time.perf_counter()
        reports = k_sweep(specs, graph, cache, _client(args), mode, args.k, jobs=args.jobs)
        log.info("%s sweep over k=%s took %.2f s", mode, args.k, time.perf_counter() - t0)
        columns[mode.lower()] = reports
        if args.out:
            out = Path(args.out)
            if len(modes) > 1:
                # the CSV has no mode column, so each mode gets its own file
                out = out.with_name(f"{out.stem}_{mode.lower()}{out.suffix}")
            _write(out, render_report_csv(reports))
    print(render_sweep_table(columns), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pave", description="Task-aware route planning with an LLM evaluator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="plan one trip")
    p.add_argument("--net", required=True, help="road network JSON")
    p.add_argument("--pois", required=True, help="POI list JSON")
    p.add_argument("--from", dest="origin", required=True)
    p.add_argument("--to", dest="destination", required=True)
    p.add_argument("--task", nargs="+", default=[], action="extend")
    p.add_argument("--prefer", nargs="+", default=[], action="extend")
    p.add_argument("--avoid-node", nargs="+", default=[], action="extend")
    p.add_argument("--avoid-tag", nargs="+", default=[], action="extend", metavar="KEY=VALUE")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--mode", choices=sorted(MODES), default="det")
    p.add_argument("--radius-m", type=float, default=DEFAULT_RADIUS_M)
    p.add_argument("--time-of-day", help="HH:MM, defaults to the current time")
    p.add_argument("--traffic", choices=["LOW", "MEDIUM", "HIGH"], default="MEDIUM")
    p.add_argument("--out", default="-", help="plan JSON (default stdout)")
    p.add_argument("--geojson", help="write the final route as a GeoJSON LineString")
    _add_backend_args(p)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("classify", help="classify free-text tasks")
    p.add_argument("--task", nargs="+", required=True, action="extend")
    p.add_argument("--aggregate", action="store_true", help="also print the merged tag set")
    _add_backend_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="run a scenario suite over a k sweep")
    p.add_argument("--suite", help="suite directory (default: the bundled suite)")
    p.add_argument("--k", type=_parse_ks, default=list(DEFAULT_KS))
    p.add_argument("--mode", choices=sorted(MODES) + ["both"], default="det")
    p.add_argument("--out", help="report CSV")
    p.add_argument("--jobs", type=int, default=1)
    _add_backend_args(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PaveError, ValueError, KeyError, OSError) as exc:
        print(f"pave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
