"""Answer backends: scripted (no network) or a chat-completions endpoint."""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Any, Callable

import httpx

ChatFn = Callable[[list[dict[str, str]]], str]

API_KEY_ENV = "TIMING_AGENT_API_KEY"


class ChatError(RuntimeError):
    pass


@dataclass(frozen=True)
class AgentBackend:
    mode: str = "scripted"  # scripted | llm
    endpoint: str | None = None
    model: str = ""
    temperature: float = 0.3
    top_p: float = 1.0
    max_retries: int = 3
    timeout: float = 60.0
    max_in_flight: int = 4
    api_key_env: str = API_KEY_ENV

    def __post_init__(self) -> None:
        if self.mode not in ("scripted", "llm"):
            raise ValueError(f"backend mode must be scripted or llm, got {self.mode!r}")
        if self.mode == "llm" and not self.endpoint:
            raise ValueError("llm backend needs an endpoint")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")

    @property
    def scripted(self) -> bool:
        return self.mode == "scripted"

    def describe(self) -> dict[str, Any]:
        """Settings safe to record in transcripts (never the key)."""
        out: dict[str, Any] = {"mode": self.mode}
        if self.mode == "llm":
            out.update(
                endpoint=self.endpoint,
                model=self.model,
                temperature=self.temperature,
                top_p=self.top_p,
                max_retries=self.max_retries,
            )
        return out


def completions_url(endpoint: str) -> str:
    url = endpoint.rstrip("/")
    if url.endswith("/chat/completions"):
        return url
    return url + "/chat/completions"


class ChatClient:
    """Minimal chat-completions client.

    The API key is read from the environment at call time and only ever sent
    in the Authorization header.
    """

    def __init__(self, backend: AgentBackend, transport: httpx.BaseTransport | None = None):
        if backend.endpoint is None:
            raise ValueError("chat client needs an endpoint")
        self.backend = backend
        self.url = completions_url(backend.endpoint)
        self._client = httpx.Client(timeout=backend.timeout, transport=transport)
        self._slots = threading.BoundedSemaphore(max(1, backend.max_in_flight))
        self.calls = 0

    def __call__(self, messages: list[dict[str, str]]) -> str:
        b = self.backend
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(b.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {
            "model": b.model,
            "messages": messages,
            "temperature": b.temperature,
            "top_p": b.top_p,
        }
        with self._slots:
            self.calls += 1
            try:
                resp = self._client.post(self.url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                raise ChatError(f"request to {self.url} failed: {type(exc).__name__}") from None
        if resp.status_code != 200:
            raise ChatError(f"{self.url} answered HTTP {resp.status_code}")
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise ChatError("malformed chat-completions response") from None
        if not isinstance(content, str):
            raise ChatError("completion content is not text")
        return content

    def close(self) -> None:
        self._client.close()


def make_chat(backend: AgentBackend, transport: httpx.BaseTransport | None = None) -> ChatFn | None:
    if backend.scripted:
        return None
    return ChatClient(backend, transport)
