"""Chat-completion transport with record/replay fixtures.

Requests are identified by a content hash over (model, system text, user
text, temperature). `record` mode calls the live endpoint and stores the raw
response under that key; `replay` mode reads only from the store and never
touches the network, so replayed runs are fully deterministic. Fixtures hold
response text and request digests, never credentials.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import requests

from .errors import ConfigError, FixtureConflictError, FixtureMissError, TransportError

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_OUTPUT_TOKENS = 2048
DEFAULT_CONCURRENCY = 4
RETRY_ATTEMPTS = 3
RETRY_DELAYS = (1.0, 2.0)


class TransportMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"

    @classmethod
    def parse(cls, value: str) -> "TransportMode":
        try:
            return cls(value.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown transport {value!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class ChatRequest:
    model: str
    system_text: str
    user_text: str
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS


@dataclass(frozen=True)
class ChatResponse:
    raw_text: str
    fixture_key: str
    transport: TransportMode


def fixture_key(model: str, system_text: str, user_text: str, temperature: float) -> str:
    """Content hash identifying one request; stable across runs and machines."""
    payload = json.dumps([model, system_text, user_text, temperature], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def request_key(request: ChatRequest) -> str:
    return fixture_key(request.model, request.system_text, request.user_text, request.temperature)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class FixtureStore:
    """Write-once directory of recorded responses, one JSON file per key."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def exists(self, key: str) -> bool:
        return self.path_for(key).is_file()

    def load(self, key: str) -> str:
        path = self.path_for(key)
        if not path.is_file():
            raise FixtureMissError(key)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return data["raw_text"]
        except (OSError, ValueError, KeyError) as exc:
            raise FixtureMissError(key, detail=f"unreadable fixture: {exc}") from exc

    def record(self, key: str, request: ChatRequest, raw_text: str) -> Path:
        """Store a response; identical re-records are no-ops, different ones refuse."""
        path = self.path_for(key)
        if path.is_file():
            if self.load(key) == raw_text:
                return path
            raise FixtureConflictError(key)
        self.root.mkdir(parents=True, exist_ok=True)
        payload = {
            "key": key,
            "model": request.model,
            "temperature": request.temperature,
            "system_sha256": _sha256(request.system_text),
            "user_sha256": _sha256(request.user_text),
            "raw_text": raw_text,
        }
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8")
        return path


_semaphore_lock = threading.Lock()
_semaphore = threading.BoundedSemaphore(DEFAULT_CONCURRENCY)


def configure_concurrency(limit: int):
    """Cap the number of in-flight live requests process-wide."""
    global _semaphore
    if limit < 1:
        raise ConfigError("concurrency must be >= 1")
    with _semaphore_lock:
        _semaphore = threading.BoundedSemaphore(limit)


def resolve_endpoint(base_url: str | None = None, api_key: str | None = None) -> tuple[str, str | None]:
    """Resolve the endpoint from arguments, then environment."""
    base = base_url or os.environ.get("DOCDRIFT_API_BASE") or os.environ.get("OPENAI_BASE_URL")
    key = api_key or os.environ.get("DOCDRIFT_API_KEY") or os.environ.get("OPENAI_API_KEY")
    if not base:
        raise ConfigError(
            "no API base URL configured; set DOCDRIFT_API_BASE (or OPENAI_BASE_URL)"
        )
    return base.rstrip("/"), key


def _call_endpoint(request: ChatRequest, base: str, key: str | None, timeout: float) -> str:
    url = base + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = {
        "model": request.model,
        "messages": [
            {"role": "system", "content": request.system_text},
            {"role": "user", "content": request.user_text},
        ],
        "temperature": request.temperature,
        "max_tokens": request.max_output_tokens,
    }
    last_error = "no attempt made"
    for attempt in range(RETRY_ATTEMPTS):
        if attempt:
            time.sleep(RETRY_DELAYS[attempt - 1])
        try:
            with _semaphore:
                resp = requests.post(url, json=body, headers=headers, timeout=timeout)
            resp.raise_for_status()
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
            if not isinstance(content, str):
                raise ValueError("message content is not a string")
            return content
        except (requests.RequestException, ValueError, KeyError, IndexError, TypeError) as exc:
            last_error = f"{type(exc).__name__}: {exc}"
    raise TransportError(
        f"chat completion failed after {RETRY_ATTEMPTS} attempts: {last_error}"
    )


def complete(
    request: ChatRequest,
    mode: TransportMode,
    fixture_dir: str | Path | None = None,
    base_url: str | None = None,
    api_key: str | None = None,
    timeout: float = 60.0,
) -> ChatResponse:
    """Run one chat completion through the selected transport.

    replay reads the fixture store only; record reuses an existing fixture or
    calls the endpoint and stores the result; live always calls the endpoint.
    """
    key = request_key(request)
    store = FixtureStore(fixture_dir) if fixture_dir is not None else None

    if mode is TransportMode.REPLAY:
        if store is None:
            raise ConfigError("replay transport requires a fixture directory")
        return ChatResponse(raw_text=store.load(key), fixture_key=key, transport=mode)

    if mode is TransportMode.RECORD:
        if store is None:
            raise ConfigError("record transport requires a fixture directory")
        if store.exists(key):
            return ChatResponse(raw_text=store.load(key), fixture_key=key, transport=mode)

    base, auth = resolve_endpoint(base_url, api_key)
    raw_text = _call_endpoint(request, base, auth, timeout)
    if mode is TransportMode.RECORD and store is not None:
        store.record(key, request, raw_text)
    return ChatResponse(raw_text=raw_text, fixture_key=key, transport=mode)
