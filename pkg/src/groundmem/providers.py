"""Chat-completion and embedding provider clients.

Live clients speak the common hosted JSON wire shapes (``/chat/completions``
and ``/embeddings``) over HTTP with bounded retries. Scripted stubs provide
bit-deterministic offline behavior for tests and for running without any
endpoint configured. Mode, endpoint, and model names come from environment
variables; see ``ProviderSettings``.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from .embeddings import DimensionMismatch, stub_embed
from .models import GroundMemError

ENV_BASE_URL = "MEM_PROVIDER_BASE_URL"
ENV_API_KEY = "MEM_PROVIDER_API_KEY"
ENV_CHAT_MODEL = "MEM_CHAT_MODEL"
ENV_EMBED_MODEL = "MEM_EMBED_MODEL"
ENV_MODE = "MEM_PROVIDER_MODE"

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_CHAT_MODEL = "gpt-4o"
DEFAULT_EMBED_MODEL = "text-embedding-3-small"

MAX_ATTEMPTS = 3
RETRY_DELAYS = (0.5, 1.0, 2.0)
MAX_OUTSTANDING = 4
REQUEST_TIMEOUT_SECONDS = 30.0


class ProviderError(GroundMemError):
    """Base class for provider failures."""


class Timeout(ProviderError):
    def __init__(self, attempts: int) -> None:
        super().__init__(f"provider timed out after {attempts} attempt(s)")
        self.attempts = attempts


class RateLimited(ProviderError):
    def __init__(self, attempts: int, status: int) -> None:
        super().__init__(
            f"provider returned status {status} on all {attempts} attempt(s)"
        )
        self.attempts = attempts
        self.status = status


class MalformedResponse(ProviderError):
    """The endpoint answered but the body did not have the expected shape."""


class StubModeViolation(ProviderError):
    """A live client was constructed while stub mode is in force."""


def provider_mode() -> str:
    """Current provider mode: 'stub' unless MEM_PROVIDER_MODE selects 'live'."""
    mode = os.environ.get(ENV_MODE, "stub").strip().lower()
    if mode not in ("live", "stub"):
        raise ProviderError(f"{ENV_MODE} must be 'live' or 'stub', got {mode!r}")
    return mode


@dataclass(frozen=True)
class ProviderSettings:
    base_url: str = DEFAULT_BASE_URL
    api_key: str = ""
    chat_model: str = DEFAULT_CHAT_MODEL
    embed_model: str = DEFAULT_EMBED_MODEL
    mode: str = "stub"

    @classmethod
    def from_env(cls) -> "ProviderSettings":
        return cls(
            base_url=os.environ.get(ENV_BASE_URL, DEFAULT_BASE_URL).rstrip("/"),
            api_key=os.environ.get(ENV_API_KEY, ""),
            chat_model=os.environ.get(ENV_CHAT_MODEL, DEFAULT_CHAT_MODEL),
            embed_model=os.environ.get(ENV_EMBED_MODEL, DEFAULT_EMBED_MODEL),
            mode=provider_mode(),
        )


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str
    images: tuple[str, ...] = ()  # base64-encoded attachments

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid message role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    model: str
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("chat request needs at least one message")

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class EmbedRequest:
    texts: tuple[str, ...]
    model: str


@dataclass(frozen=True)
class EmbedResponse:
    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        dims = {len(vector) for vector in self.vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"mixed embedding dims in one response: {sorted(dims)}")


class ChatClient(Protocol):
    def chat(self, request: ChatRequest) -> ChatResponse: ...


class EmbedClient(Protocol):
    def embed(self, request: EmbedRequest) -> EmbedResponse: ...


def _message_payload(message: ChatMessage) -> dict[str, object]:
    if not message.images:
        return {"role": message.role, "content": message.content}
    parts: list[dict[str, object]] = [{"type": "text", "text": message.content}]
    for image in message.images:
        parts.append(
            {
                "type": "image_url",
                "image_url": {"url": f"data:image/jpeg;base64,{image}"},
            }
        )
    return {"role": message.role, "content": parts}


class _LiveBase:
    def __init__(
        self,
        settings: ProviderSettings,
        delays: tuple[float, ...] = RETRY_DELAYS,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if provider_mode() == "stub":
            raise StubModeViolation(
                "live provider clients must not be constructed in stub mode"
            )
        self.settings = settings
        self.delays = delays
        headers = {"Content-Type": "application/json"}
        if settings.api_key:
            headers["Authorization"] = f"Bearer {settings.api_key}"
        self._client = httpx.Client(
            base_url=settings.base_url,
            headers=headers,
            timeout=REQUEST_TIMEOUT_SECONDS,
            transport=transport,
        )
        self._semaphore = threading.Semaphore(MAX_OUTSTANDING)

    def _post(self, path: str, payload: dict[str, object]) -> dict[str, object]:
        last_status = 0
        timed_out = False
        for attempt in range(MAX_ATTEMPTS):
            try:
                with self._semaphore:
                    response = self._client.post(path, json=payload)
            except httpx.TimeoutException:
                timed_out = True
            else:
                timed_out = False
                if response.status_code == 200:
                    try:
                        body = response.json()
                    except json.JSONDecodeError as exc:
                        raise MalformedResponse(f"invalid JSON body: {exc}") from exc
                    if not isinstance(body, dict):
                        raise MalformedResponse("response body is not a JSON object")
                    return body
                last_status = response.status_code
                retryable = last_status == 429 or last_status >= 500
                if not retryable:
                    raise MalformedResponse(
                        f"provider returned status {last_status}: {response.text[:200]}"
                    )
            if attempt + 1 < MAX_ATTEMPTS and attempt < len(self.delays):
                time.sleep(self.delays[attempt])
        if timed_out:
            raise Timeout(MAX_ATTEMPTS)
        raise RateLimited(MAX_ATTEMPTS, last_status)

    def close(self) -> None:
        self._client.close()


class LiveChatClient(_LiveBase):
    def chat(self, request: ChatRequest) -> ChatResponse:
        payload: dict[str, object] = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [_message_payload(m) for m in request.messages],
        }
        body = self._post("/chat/completions", payload)
        try:
            choice = body["choices"][0]  # type: ignore[index]
            content = choice["message"]["content"]
            finish = choice.get("finish_reason", "stop")
            usage = body.get("usage", {})
            return ChatResponse(
                content=str(content),
                finish_reason=str(finish),
                prompt_tokens=int(usage.get("prompt_tokens", 0)),  # type: ignore[union-attr]
                completion_tokens=int(usage.get("completion_tokens", 0)),  # type: ignore[union-attr]
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected chat response shape: {exc}") from exc


class LiveEmbedClient(_LiveBase):
    def embed(self, request: EmbedRequest) -> EmbedResponse:
        if not request.texts:
            return EmbedResponse(vectors=())
        payload: dict[str, object] = {
            "model": request.model,
            "input": list(request.texts),
        }
        body = self._post("/embeddings", payload)
        try:
            data = body["data"]
            vectors = tuple(tuple(float(x) for x in item["embedding"]) for item in data)  # type: ignore[index,union-attr]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"unexpected embed response shape: {exc}") from exc
        if len(vectors) != len(request.texts):
            raise MalformedResponse(
                f"expected {len(request.texts)} vectors, got {len(vectors)}"
            )
        return EmbedResponse(vectors=vectors)


@dataclass(frozen=True)
class StubRule:
    match: str  # substring (case-insensitive), or regex when prefixed "re:"
    response: str

    def matches(self, text: str) -> bool:
        if self.match.startswith("re:"):
            return re.search(self.match[3:], text, re.IGNORECASE) is not None
        return self.match.lower() in text.lower()


@dataclass
class ScriptedStub:
    """Deterministic chat double: first matching rule wins, else fallthrough.

    Rules match against the last user message of the request.
    """

    rules: tuple[StubRule, ...] = ()
    fallthrough: str = ""
    calls: list[ChatRequest] = field(default_factory=list)

    @classmethod
    def from_script(cls, entries: list[dict[str, str]]) -> "ScriptedStub":
        rules: list[StubRule] = []
        fallthrough = ""
        for entry in entries:
            if "match" in entry:
                rules.append(StubRule(match=entry["match"], response=entry["response"]))
            else:
                fallthrough = entry["response"]
        return cls(rules=tuple(rules), fallthrough=fallthrough)

    @classmethod
    def from_script_file(cls, path: str) -> "ScriptedStub":
        with open(path, encoding="utf-8") as handle:
            entries = json.load(handle)
        if not isinstance(entries, list):
            raise ProviderError(f"stub script {path} must be a JSON list")
        return cls.from_script(entries)

    def chat(self, request: ChatRequest) -> ChatResponse:
        self.calls.append(request)
        text = request.last_user_content()
        for rule in self.rules:
            if rule.matches(text):
                content = rule.response
                break
        else:
            content = self.fallthrough
        prompt_tokens = sum(len(m.content.split()) for m in request.messages)
        return ChatResponse(
            content=content,
            finish_reason="stop",
            prompt_tokens=prompt_tokens,
            completion_tokens=len(content.split()),
        )


class StubEmbedClient:
    """Hashed bag-of-tokens embeddings; identical inputs give identical vectors."""

    def embed(self, request: EmbedRequest) -> EmbedResponse:
        vectors = tuple(tuple(stub_embed(text).tolist()) for text in request.texts)
        return EmbedResponse(vectors=vectors)


def make_chat_client(
    settings: ProviderSettings | None = None, stub: ScriptedStub | None = None
) -> ChatClient:
    settings = settings or ProviderSettings.from_env()
    if settings.mode == "live":
        return LiveChatClient(settings)
    return stub if stub is not None else ScriptedStub()


def make_embed_client(settings: ProviderSettings | None = None) -> EmbedClient:
    settings = settings or ProviderSettings.from_env()
    if settings.mode == "live":
        return LiveEmbedClient(settings)
    return StubEmbedClient()
