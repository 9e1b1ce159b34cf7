"""Task-aware vehicle route planning: k candidate routes, POI enrichment and an LLM evaluator."""
from __future__ import annotations

from .enrichment import AvoidRule, Dossier, ScenarioContext, UserContext
from .errors import PaveError
from .evaluator import Decision, evaluate_deterministic
from .kernels import BACKEND
from .llm_client import BackendConfig, LLMClient
from .orchestrator import FinalPlan, PlanRequest, plan
from .pathfinding import CO2, TIME, Route, k_candidates, scalarized, shortest_path, yen_k_shortest
from .poi_cache import PoiCache, load_pois
from .road_graph import Graph, load_network

__version__ = "0.1.0"
