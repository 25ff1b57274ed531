"""Completion backends: OpenAI-compatible HTTP and digest-keyed scripted fixtures."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx

from ..errors import BackendRejected, BackendTimeout, NoScriptedResponse

log = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_tokens: int = 512
    temperature: float = 0.0
    stop: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError("temperature must be finite and >= 0")


@dataclass(frozen=True)
class Completion:
    text: str
    meta: dict[str, str] = field(default_factory=dict)


class Backend(Protocol):
    name: str

    def complete(self, request: CompletionRequest) -> Completion: ...


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def complete(backend: Backend, request: CompletionRequest) -> str:
    return backend.complete(request).text


class ScriptedBackend:
    """Returns canned responses keyed by the SHA-256 of the prompt."""

    name = "scripted"

    def __init__(self, responses: dict[str, str]) -> None:
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedBackend:
        """Load a fixture: a JSON object ``{digest: response}``."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: scripted fixture must be a JSON object")
        return cls({str(k): str(v) for k, v in data.items()})

    @classmethod
    def from_prompts(cls, mapping: dict[str, str]) -> ScriptedBackend:
        return cls({prompt_digest(p): r for p, r in mapping.items()})

    def complete(self, request: CompletionRequest) -> Completion:
        digest = prompt_digest(request.prompt)
        try:
            text = self.responses[digest]
        except KeyError:
            raise NoScriptedResponse(f"no scripted response for prompt digest {digest}") from None
        return Completion(text, {"backend": self.name, "digest": digest, "retries": "0"})


class HTTPBackend:
    """Chat-completions client for any OpenAI-compatible endpoint.

    Transient failures (timeouts, connection errors, 429 and 5xx) are retried with
    exponential backoff; other 4xx responses raise :class:`BackendRejected`.
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        path: str = "/chat/completions",
        api_key: str | None = None,
        api_key_env: str = "OPENAI_API_KEY",
        auth_header: str = "Authorization",
        timeout: float = 60.0,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        backoff_cap: float = 30.0,
        max_in_flight: int = 8,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.url = base_url.rstrip("/") + "/" + path.lstrip("/")
        self.model = model
        key = api_key if api_key is not None else os.environ.get(api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers[auth_header] = f"Bearer {key}" if auth_header.lower() == "authorization" else key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(headers=headers, timeout=timeout, transport=transport)

    def _body(self, request: CompletionRequest) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        if request.stop:
            body["stop"] = list(request.stop)
        return body

    def _delay(self, attempt: int) -> float:
        return min(self.backoff_cap, self.backoff_base * 2**attempt)

    def complete(self, request: CompletionRequest) -> Completion:
        body = self._body(request)
        start = time.monotonic()
        retries = 0
        with self._slots:
            while True:
                try:
                    resp = self._client.post(self.url, json=body)
                except (httpx.TimeoutException, httpx.TransportError) as exc:
                    if retries >= self.max_retries:
                        raise BackendTimeout(f"{self.url}: {type(exc).__name__} after {retries} retries") from exc
                    log.warning("transient error from %s (%s); retrying", self.url, exc)
                else:
                    if resp.status_code < 400:
                        break
                    if resp.status_code not in TRANSIENT_STATUS or retries >= self.max_retries:
                        raise BackendRejected(resp.status_code, resp.text)
                    log.warning("HTTP %s from %s; retrying", resp.status_code, self.url)
                self._sleep(self._delay(retries))
                retries += 1
        try:
            payload = resp.json()
            text = payload["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendRejected(resp.status_code, f"malformed completion payload: {resp.text[:500]}") from exc
        meta = {
            "backend": self.name,
            "model": str(payload.get("model", self.model)),
            "retries": str(retries),
            "latency_s": f"{time.monotonic() - start:.3f}",
        }
        return Completion(text, meta)

    def close(self) -> None:
        self._client.close()
