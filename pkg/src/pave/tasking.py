"""Prompt rendering, structured-output parsing, and task classification."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Any, Callable, Iterable, Mapping, Sequence

import jsonschema

from .errors import MissingSlotError, PreconditionError, SchemaError
from .llm_client import ChatMessage, Role

log = logging.getLogger(__name__)

CLASSIFY = "CLASSIFY"
AGGREGATE = "AGGREGATE"
EVALUATE = "EVALUATE"

TEMPLATE_VERSION = 1
_TEMPLATE_FILES = {
    CLASSIFY: f"classify_v{TEMPLATE_VERSION}.txt",
    AGGREGATE: f"aggregate_v{TEMPLATE_VERSION}.txt",
    EVALUATE: f"evaluate_v{TEMPLATE_VERSION}.txt",
}
PRIORITIES = ("URGENT", "NORMAL")

CLASSIFY_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["task", "priority", "osm_tags"],
        "properties": {
            "task": {"type": "string"},
            "priority": {"enum": list(PRIORITIES)},
            "osm_tags": {"type": "object", "minProperties": 1, "additionalProperties": {"type": "string"}},
        },
    },
}
AGGREGATE_SCHEMA = {
    "type": "object",
    "required": ["osm_tags"],
    "properties": {"osm_tags": {"type": "object", "additionalProperties": {"type": "string"}}},
}


@dataclass(frozen=True)
class ClassifiedTask:
    task: str
    priority: str
    osm_tags: dict = field(hash=False)

    def __post_init__(self):
        if self.priority not in PRIORITIES:
            raise PreconditionError(f"priority must be URGENT or NORMAL, got {self.priority!r}")
        if not self.osm_tags:
            raise PreconditionError("osm_tags must be non-empty")

    @property
    def urgent(self) -> bool:
        return self.priority == "URGENT"

    def to_dict(self) -> dict:
        return {"task": self.task, "priority": self.priority, "osm_tags": dict(self.osm_tags)}

    @classmethod
    def from_dict(cls, d) -> "ClassifiedTask":
        return cls(d["task"], d["priority"], dict(d["osm_tags"]))


@dataclass(frozen=True)
class TagSet:
    tags: dict


# ---------------------------------------------------------------------------
# keyword rules: the offline classifier behind the STUB backend and the
# benchmark's reference classification

POI_KEYWORDS: tuple[tuple[re.Pattern, dict], ...] = (
    (re.compile(r"\b(?:gas|fuel|empty tank)\b", re.I), {"amenity": "fuel"}),
    (re.compile(r"\b(?:supermarket|grocery|groceries)\b", re.I), {"shop": "supermarket"}),
    (re.compile(r"\bparks?\b", re.I), {"leisure": "park"}),
    (re.compile(r"\bhospital\b", re.I), {"amenity": "hospital"}),
    (re.compile(r"\bpharmacy\b", re.I), {"amenity": "pharmacy"}),
)
URGENT_MARKERS = re.compile(r"\b(?:running out|need|urgent|emergency|almost empty)\b", re.I)
_SPLIT = re.compile(r"\b(?:and then|then|before|on the way to)\b", re.I)


def split_clauses(text: str) -> list[str]:
    parts = (p.strip(" \t\n,;.") for p in _SPLIT.split(text))
    return [p for p in parts if p]


def keyword_classify(tasks: Iterable[str]) -> list[ClassifiedTask]:
    """Classify tasks with the fixed keyword table.

    Each clause becomes one task per kind of place it mentions (in order
    of mention); clauses naming no known place are dropped.
    """
    out = []
    for text in tasks:
        for clause in split_clauses(text):
            priority = "URGENT" if URGENT_MARKERS.search(clause) else "NORMAL"
            found = []
            for pattern, tags in POI_KEYWORDS:
                m = pattern.search(clause)
                if m:
                    found.append((m.start(), tags))
            for _, tags in sorted(found, key=lambda f: f[0]):
                out.append(ClassifiedTask(clause, priority, dict(tags)))
    return out


def merge_tags(classified: Iterable[ClassifiedTask]) -> dict:
    """Merge task tags in order; a later task wins a key conflict."""
    merged: dict[str, str] = {}
    for t in classified:
        for k, v in t.osm_tags.items():
            if k in merged and merged[k] != v:
                log.info("tag conflict on %r: %r replaced by %r", k, merged[k], v)
            merged[k] = v
    return merged


# ---------------------------------------------------------------------------
# templates


@lru_cache(maxsize=None)
def _load_template(name: str) -> tuple[Template, Template]:
    text = resources.files("pave.prompts").joinpath(_TEMPLATE_FILES[name]).read_text(encoding="utf-8")
    m = re.match(r"\[system\]\n(.*?)\n\[user\]\n(.*)\Z", text, re.S)
    if m is None:
        raise ValueError(f"template {name} is missing [system]/[user] sections")
    return Template(m.group(1).strip()), Template(m.group(2).strip())


def _slot_values(template: str, context: Mapping[str, Any]) -> dict[str, str]:
    if template in (CLASSIFY, AGGREGATE):
        if "tasks" not in context:
            raise MissingSlotError("tasks")
        return {"tasks_json": json.dumps(list(context["tasks"]), indent=2, ensure_ascii=False)}
    if template == EVALUATE:
        if "dossier" not in context:
            raise MissingSlotError("dossier")
        dossier = context["dossier"]
        text = dossier.to_json() if hasattr(dossier, "to_json") else json.dumps(dossier, sort_keys=True, indent=2)
        return {"dossier_json": text}
    raise PreconditionError(f"unknown template {template!r}")


def render_prompt(template: str, context: Mapping[str, Any]) -> list[ChatMessage]:
    system, user = _load_template(template)
    slots = _slot_values(template, context)
    try:
        return [
            ChatMessage(Role.SYSTEM, system.substitute(slots)),
            ChatMessage(Role.USER, user.substitute(slots)),
        ]
    except KeyError as exc:
        raise MissingSlotError(exc.args[0]) from None


def prompt_id(messages: Sequence[ChatMessage]) -> str | None:
    """The ``prompt-id`` declared in the system message, if any."""
    for m in messages:
        if m.role is Role.SYSTEM:
            found = re.search(r"^prompt-id:\s*(\S+)", m.content, re.M)
            if found:
                return found.group(1)
    return None


def prompt_input(messages: Sequence[ChatMessage]) -> str | None:
    """Text between the first user message's <input> markers."""
    for m in messages:
        if m.role is Role.USER:
            found = re.search(r"<input>\n(.*)\n</input>", m.content, re.S)
            if found:
                return found.group(1)
    return None


# ---------------------------------------------------------------------------
# structured replies

_decoder = json.JSONDecoder()


def extract_json(text: str, kind: type):
    """First well-formed JSON value of type ``kind`` embedded in ``text``."""
    opener = "[" if kind is list else "{"
    start = text.find(opener)
    while start != -1:
        try:
            value, _ = _decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            pass
        else:
            if isinstance(value, kind):
                return value
        start = text.find(opener, start + 1)
    raise ValueError(f"no JSON {kind.__name__} found in reply")


_validators: dict[int, tuple[dict, Any]] = {}


def _validator(schema: dict):
    # jsonschema.validate re-checks the schema on every call; build once instead
    hit = _validators.get(id(schema))
    if hit is None or hit[0] is not schema:
        cls = jsonschema.validators.validator_for(schema)
        cls.check_schema(schema)
        hit = (schema, cls(schema))
        _validators[id(schema)] = hit
    return hit[1]


REPAIR_PROMPT = (
    "Your previous answer could not be used: {error}. "
    "Answer again and end with only the JSON in the required format."
)


def ask_structured(client, messages: Sequence[ChatMessage], stage: str, kind: type, schema: dict,
                   check: Callable[[Any], None] | None = None):
    """Query ``client`` until the reply parses and validates.

    The first attempt is followed by at most ``client.max_retries``
    re-prompts, each quoting the bad reply and the validation error.
    """
    retries = client.max_retries
    convo = list(messages)
    raw = None
    error = "no reply"
    for attempt in range(retries + 1):
        raw = client.complete(convo)
        try:
            value = extract_json(raw, kind)
            err = jsonschema.exceptions.best_match(_validator(schema).iter_errors(value))
            if err is not None:
                raise err
            if check is not None:
                check(value)
            return value
        except jsonschema.ValidationError as exc:
            error = f"schema violation: {exc.message}"
        except ValueError as exc:
            error = str(exc)
        log.warning("%s: attempt %d rejected (%s)", stage, attempt + 1, error)
        convo = list(messages) + [
            ChatMessage(Role.ASSISTANT, raw or "(empty reply)"),
            ChatMessage(Role.USER, REPAIR_PROMPT.format(error=error)),
        ]
    raise SchemaError(stage, error, raw=raw, attempts=retries + 1)


def classify_tasks(client, tasks: Sequence[str]) -> list[ClassifiedTask]:
    tasks = list(tasks)
    if not tasks:
        raise PreconditionError("classify_tasks needs at least one task")
    value = ask_structured(client, render_prompt(CLASSIFY, {"tasks": tasks}), "classify", list, CLASSIFY_SCHEMA)
    return [ClassifiedTask.from_dict(item) for item in value]


def aggregate_tags(client, tasks: Sequence[str]) -> TagSet:
    tasks = list(tasks)
    if not tasks:
        raise PreconditionError("aggregate_tags needs at least one task")
    value = ask_structured(client, render_prompt(AGGREGATE, {"tasks": tasks}), "aggregate", dict, AGGREGATE_SCHEMA)
    return TagSet(dict(value["osm_tags"]))
