"""Model backends: an OpenAI-compatible HTTP client and a scripted replayer."""

from __future__ import annotations

import base64
import io
import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Protocol, Sequence, Union

import httpx

from uavmission.clock import Clock, SimulatedClock, WallClock
from uavmission.errors import (
    AuthRejected,
    ConfigurationError,
    EndpointUnreachable,
    GatewayError,
    ScenarioExhausted,
)
from uavmission.gateway.messages import (
    ImagePart,
    ModelMessage,
    ModelRequest,
    ModelResponse,
    TextPart,
)

log = logging.getLogger(__name__)


class Backend(Protocol):
    backend_id: str
    deterministic: bool

    def send(self, request: ModelRequest) -> ModelResponse: ...

    def fresh(self) -> "Backend": ...


def complete(request: ModelRequest, backend: Backend) -> ModelResponse:
    """Send one request through ``backend`` and return its response."""
    return backend.send(request)


# ---------------------------------------------------------------------------
# Scripted backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptEntry:
    match: Union[str, int]
    response: str
    latency: float = 0.0


@dataclass(frozen=True)
class ScriptedScenario:
    """Canned responses keyed by call ordinal (1-based) or by substring.

    Ordinal entries fire on exactly that call number. String entries fire on
    any call whose latest user message contains the string; the first such
    entry in file order wins. Ordinal matches take precedence.
    """

    entries: tuple[ScriptEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("scenario needs at least one entry")
        ordinals = [e.match for e in self.entries if isinstance(e.match, int)]
        if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
            raise ValueError("ordinal matchers must be strictly increasing")
        if any(o < 1 for o in ordinals):
            raise ValueError("ordinal matchers are 1-based")

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ScriptedScenario":
        entries = []
        for raw in doc.get("entries", []):
            match = raw["match"]
            if isinstance(match, bool) or not isinstance(match, (str, int)):
                raise ValueError(f"bad matcher {match!r}")
            entries.append(ScriptEntry(match, str(raw["response"]), float(raw.get("latency", 0.0))))
        return cls(tuple(entries))

    @classmethod
    def load(cls, path: str | Path) -> "ScriptedScenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def sequence(cls, responses: Iterable[str], latency: float = 0.0) -> "ScriptedScenario":
        return cls(tuple(ScriptEntry(i, r, latency) for i, r in enumerate(responses, start=1)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "entries": [
                {"match": e.match, "response": e.response, **({"latency": e.latency} if e.latency else {})}
                for e in self.entries
            ]
        }


class ScriptedBackend:
    deterministic = True

    def __init__(self, scenario: ScriptedScenario, backend_id: str = "scripted"):
        self.scenario = scenario
        self.backend_id = backend_id
        self._ordinals = {e.match: e for e in scenario.entries if isinstance(e.match, int)}
        self._substrings = [e for e in scenario.entries if isinstance(e.match, str)]
        self._calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls(ScriptedScenario.load(path))

    @property
    def calls(self) -> int:
        return self._calls

    def fresh(self) -> "ScriptedBackend":
        """Same scenario, call counter reset to zero."""
        return ScriptedBackend(self.scenario, self.backend_id)

    def send(self, request: ModelRequest) -> ModelResponse:
        with self._lock:
            self._calls += 1
            n = self._calls
        request_id = request.request_id or f"{self.backend_id}-{n}"
        entry = self._ordinals.get(n)
        if entry is None:
            prompt = request.last_user_text
            entry = next((e for e in self._substrings if e.match in prompt), None)
        if entry is None:
            raise ScenarioExhausted(f"no scripted entry for call {n}", request_id)
        return ModelResponse(entry.response, entry.latency, self.backend_id, request_id)


# ---------------------------------------------------------------------------
# HTTP backend
# ---------------------------------------------------------------------------

_TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


def encode_png_data_url(image) -> str:
    buf = io.BytesIO()
    image.image.save(buf, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def _message_payload(msg: ModelMessage) -> dict[str, Any]:
    # chat-completions "tool" turns need a tool_call_id we never have
    role = "user" if msg.role == "tool" else msg.role
    if all(isinstance(p, TextPart) for p in msg.parts):
        text = msg.text_content
        if msg.role == "tool":
            text = "Observation:\n" + text
        return {"role": role, "content": text}
    content: list[dict[str, Any]] = []
    for part in msg.parts:
        if isinstance(part, TextPart):
            content.append({"type": "text", "text": part.text})
        elif isinstance(part, ImagePart):
            content.append({"type": "image_url", "image_url": {"url": encode_png_data_url(part.image)}})
    return {"role": role, "content": content}


def build_payload(request: ModelRequest) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "model": request.model_name,
        "messages": [_message_payload(m) for m in request.messages],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }
    if request.seed is not None:
        payload["seed"] = request.seed
    return payload


def _response_text(body: dict[str, Any]) -> str:
    content = body["choices"][0]["message"]["content"]
    if isinstance(content, list):
        return "".join(c.get("text", "") for c in content if isinstance(c, dict))
    return content or ""


class HttpBackend:
    """OpenAI-compatible ``/chat/completions`` client.

    Transient failures (connection errors, timeouts, 429 and 5xx) are retried
    ``max_retries`` times with exponential backoff of 1 s, 2 s, 4 s.
    """

    deterministic = False

    def __init__(
        self,
        api_base: str,
        credential_env: str = "OPENAI_API_KEY",
        *,
        timeout: float = 120.0,
        max_retries: int = 3,
        backoff_base: float = 1.0,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
        backend_id: Optional[str] = None,
    ):
        if not api_base:
            raise ConfigurationError("HTTP backend needs an api base URL")
        key = os.environ.get(credential_env, "").strip()
        if not key:
            raise ConfigurationError(f"credential environment variable {credential_env} is not set")
        self.api_base = api_base.rstrip("/")
        self.credential_env = credential_env
        self.backend_id = backend_id or f"http:{self.api_base}"
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._timeout = timeout
        self._transport = transport
        self._client = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {key}"},
        )

    def fresh(self) -> "HttpBackend":
        return self

    def close(self) -> None:
        self._client.close()

    def send(self, request: ModelRequest) -> ModelResponse:
        request_id = request.request_id or uuid.uuid4().hex[:12]
        url = f"{self.api_base}/chat/completions"
        payload = build_payload(request)
        started = time.perf_counter()
        last_error = "no attempt made"
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff_base * 2 ** (attempt - 1)
                log.info("retrying %s in %.1fs (attempt %d)", request_id, delay, attempt + 1)
                self._sleep(delay)
            try:
                resp = self._client.post(url, json=payload)
            except httpx.TransportError as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise AuthRejected(f"endpoint rejected credential (HTTP {resp.status_code})", request_id)
            if resp.status_code in _TRANSIENT_STATUS:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}", request_id)
            try:
                text = _response_text(resp.json())
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise GatewayError(f"malformed completion body: {exc}", request_id) from exc
            return ModelResponse(text, time.perf_counter() - started, self.backend_id, request_id)
        raise EndpointUnreachable(
            f"{url} failed after {self.max_retries + 1} attempts ({last_error})", request_id
        )


# ---------------------------------------------------------------------------
# Gateway: backend + sampling defaults + run clock
# ---------------------------------------------------------------------------


@dataclass
class Gateway:
    backend: Backend
    model_name: str = "scripted"
    temperature: float = 0.5
    max_tokens: int = 1024
    seed: Optional[int] = None
    clock: Clock = field(default_factory=WallClock)

    @classmethod
    def for_backend(cls, backend: Backend, **kwargs: Any) -> "Gateway":
        kwargs.setdefault("clock", SimulatedClock() if backend.deterministic else WallClock())
        return cls(backend, **kwargs)

    def ask(
        self,
        messages: Sequence[ModelMessage],
        *,
        temperature: Optional[float] = None,
        max_tokens: Optional[int] = None,
    ) -> ModelResponse:
        request = ModelRequest(
            tuple(messages),
            temperature=self.temperature if temperature is None else temperature,
            max_tokens=max_tokens or self.max_tokens,
            model_name=self.model_name,
            seed=self.seed,
        )
        response = complete(request, self.backend)
        self.clock.advance(response.latency)
        return response

    def fork(self, **changes: Any) -> "Gateway":
        """A copy with a fresh backend session and clock unless given."""
        changes.setdefault("backend", self.backend.fresh())
        if "clock" not in changes:
            changes["clock"] = SimulatedClock() if self.clock.simulated else WallClock()
        return replace(self, **changes)
