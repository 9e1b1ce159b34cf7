"""Text-completion client with stub, record/replay and HTTP backends.

STUB answers from deterministic keyword rules, REPLAY serves recorded
fixtures keyed by a hash of the message list, HTTP talks to any
OpenAI-compatible chat-completions endpoint.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import httpx

from .errors import MissingFixtureError, PreconditionError, TransportError

log = logging.getLogger(__name__)

KINDS = ("STUB", "REPLAY", "HTTP")


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if not isinstance(self.role, Role):
            object.__setattr__(self, "role", Role(self.role))
        if not self.content:
            raise PreconditionError("chat message content must be non-empty")

    def to_dict(self):
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "STUB"
    endpoint: str | None = None
    model: str | None = None
    api_key: str | None = None
    fixture_dir: str | None = None
    max_retries: int = 3
    timeout_s: float = 120.0

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise PreconditionError(f"backend kind must be one of {KINDS}, got {self.kind!r}")
        if kind == "HTTP" and not (self.endpoint and self.model):
            raise PreconditionError("HTTP backend needs endpoint and model")
        if kind == "REPLAY" and not self.fixture_dir:
            raise PreconditionError("REPLAY backend needs fixture_dir")
        if self.max_retries < 0:
            raise PreconditionError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, kind: str = "HTTP", **overrides) -> "BackendConfig":
        """Fill endpoint/model/api_key from PAVE_LLM_* environment variables."""
        values = {
            "endpoint": os.environ.get("PAVE_LLM_ENDPOINT"),
            "model": os.environ.get("PAVE_LLM_MODEL"),
            "api_key": os.environ.get("PAVE_LLM_API_KEY"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **values)


def request_hash(messages: Sequence[ChatMessage]) -> str:
    canonical = json.dumps([m.to_dict() for m in messages], sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fixture_path(fixture_dir, key: str) -> Path:
    return Path(fixture_dir) / f"{key}.json"


class LLMClient:
    """Uniform ``complete(messages) -> str`` over the configured backend.

    ``responder`` replaces the built-in STUB rules (used to script
    misbehaving models in tests). ``calls`` counts backend invocations.
    """

    def __init__(self, config: BackendConfig | None = None, responder: Callable[[list[ChatMessage]], str] | None = None,
                 http_client: httpx.Client | None = None):
        self.config = config or BackendConfig()
        self._responder = responder
        self._http = http_client
        self._lock = threading.Lock()
        self.calls = 0

    @property
    def max_retries(self) -> int:
        return self.config.max_retries

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        messages = tuple(messages)
        if not messages:
            raise PreconditionError("messages must be non-empty")
        if messages[-1].role is not Role.USER:
            raise PreconditionError("the last message must come from the user")
        with self._lock:
            self.calls += 1
        kind = self.config.kind
        if kind == "STUB":
            if self._responder is not None:
                return self._responder(list(messages))
            from .stub import stub_reply

            return stub_reply(messages)
        if kind == "REPLAY":
            return self._replay(messages)
        return self._http_complete(messages)

    def record(self, messages: Sequence[ChatMessage], reply: str) -> Path:
        if not self.config.fixture_dir:
            raise PreconditionError("recording needs a fixture_dir")
        return write_fixture(self.config.fixture_dir, messages, reply)

    def _replay(self, messages) -> str:
        key = request_hash(messages)
        path = _fixture_path(self.config.fixture_dir, key)
        if not path.exists():
            raise MissingFixtureError(key, self.config.fixture_dir)
        return json.loads(path.read_text(encoding="utf-8"))["reply"]

    def _http_complete(self, messages) -> str:
        cfg = self.config
        key = request_hash(messages)
        url = cfg.endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        body = {"model": cfg.model, "messages": [m.to_dict() for m in messages], "temperature": 0}
        client = self._http or httpx.Client(timeout=cfg.timeout_s)
        last_error = "no attempt made"
        try:
            for attempt in range(cfg.max_retries + 1):
                if attempt:
                    time.sleep(min(0.5 * 2 ** (attempt - 1), 8.0) if self._http is None else 0)
                try:
                    resp = client.post(url, json=body, headers=headers)
                except httpx.TransportError as exc:
                    last_error = f"transport failure: {exc}"
                    log.warning("HTTP attempt %d failed: %s", attempt + 1, exc)
                    continue
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                    log.warning("HTTP attempt %d got status %d", attempt + 1, resp.status_code)
                    continue
                if resp.status_code >= 400:
                    raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", key)
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    raise TransportError(f"malformed chat-completion response ({exc})", key) from exc
        finally:
            if self._http is None:
                client.close()
        raise TransportError(f"gave up after {cfg.max_retries + 1} attempts, last error: {last_error}", key)


def write_fixture(fixture_dir, messages: Sequence[ChatMessage], reply: str) -> Path:
    """Store ``reply`` under the hash of ``messages``; last write wins."""
    key = request_hash(messages)
    path = _fixture_path(fixture_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
    tmp.write_text(json.dumps({"request_hash": key, "reply": reply}, ensure_ascii=False, indent=2), encoding="utf-8")
    os.replace(tmp, path)
    return path


class RecordingClient:
    """Wrap a client and store every reply as a REPLAY fixture."""

    def __init__(self, inner: LLMClient, fixture_dir):
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)

    @property
    def max_retries(self) -> int:
        return self.inner.max_retries

    @property
    def calls(self) -> int:
        return self.inner.calls

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        reply = self.inner.complete(messages)
        write_fixture(self.fixture_dir, messages, reply)
        return reply


def complete(config: BackendConfig, messages: Sequence[ChatMessage]) -> str:
    return LLMClient(config).complete(messages)


def record(config: BackendConfig, messages: Sequence[ChatMessage], reply: str) -> Path:
    return LLMClient(config).record(messages, reply)
