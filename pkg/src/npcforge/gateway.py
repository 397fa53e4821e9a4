"""Chat and embedding providers with a shared retry budget and record/replay.

One logical request gets at most MAX_ATTEMPTS provider calls. Connection
errors, provider refusals, unrepairable output and stage-level rejections
all draw from that same budget; there is no separate per-failure-kind
counter anywhere downstream.

Fixture stores hold one file per request, named by the sha256 of the
canonical request JSON, so editing a prompt template deliberately
invalidates every fixture recorded for it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, TypeVar

import requests

from .errors import (
    ConfigurationError,
    ExhaustedRetries,
    FixtureMiss,
    ProviderConnectionError,
    ProviderRefusal,
    RejectedOutput,
    Unrepairable,
    ZeroVector,
)

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 6  # one initial request plus five resends

DEFAULT_CHAT_MODEL = "gpt-4o"
DEFAULT_EMBEDDING_MODEL = "text-embedding-ada-002"
DEFAULT_BASE_URL = "https://api.openai.com/v1"

T = TypeVar("T")


@dataclass(frozen=True)
class ChatRequest:
    """One prompt pair sent to the chat backend."""

    system_prompt: str
    user_prompt: str
    temperature_hint: float | None = None


class ChatProvider(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed_raw(self, text: str) -> tuple[float, ...]: ...


def request_hash(request: ChatRequest) -> str:
    """Stable content hash of the prompt pair; temperature is advisory and excluded."""
    canonical = json.dumps(
        {"system": request.system_prompt, "user": request.user_prompt},
        sort_keys=True, ensure_ascii=False, separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def embedding_hash(text: str, provider_name: str, dimension: int) -> str:
    canonical = json.dumps(
        {"dimension": dimension, "embed": text, "provider": provider_name},
        sort_keys=True, ensure_ascii=False, separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def coerce_structured(raw: str) -> object:
    """Coerce a model reply into a parsed JSON document.

    Repair is deliberately conservative: strip code fences and
    surrounding prose, extract the first balanced top-level object or
    array (string-aware), and re-parse. Anything else, including
    trailing commas, is Unrepairable; idempotent over its own output.
    """
    if not isinstance(raw, str):
        raise Unrepairable(f"reply is not text: {type(raw).__name__}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    stripped = _strip_fences(raw)
    try:
        return json.loads(stripped)
    except json.JSONDecodeError:
        pass
    candidate = _first_balanced(stripped)
    if candidate is None:
        candidate = _first_balanced(raw)
    if candidate is not None:
        try:
            return json.loads(candidate)
        except json.JSONDecodeError as err:
            raise Unrepairable(f"extracted block is still not JSON: {err}") from err
    raise Unrepairable("no JSON document found in reply")


def _strip_fences(raw: str) -> str:
    text = raw.strip()
    if not text.startswith("```"):
        return text
    first_newline = text.find("\n")
    if first_newline == -1:
        return text
    body = text[first_newline + 1:]
    closing = body.rfind("```")
    if closing != -1:
        body = body[:closing]
    return body.strip()


def _first_balanced(text: str) -> str | None:
    """First balanced top-level {...} or [...], skipping braces inside strings."""
    openers = {"{": "}", "[": "]"}
    start = None
    for index, char in enumerate(text):
        if char in openers:
            start = index
            break
    if start is None:
        return None
    stack = [openers[text[start]]]
    in_string = False
    escaped = False
    for index in range(start + 1, len(text)):
        char = text[index]
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char in openers:
            stack.append(openers[char])
        elif char in ("}", "]"):
            if not stack or char != stack[-1]:
                return None
            stack.pop()
            if not stack:
                return text[start:index + 1]
    return None


def chat_complete(request: ChatRequest, provider: ChatProvider) -> str:
    """Raw completion with the standard budget applied to transport failures."""
    last: Exception | None = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            return provider.complete(request)
        except (ProviderConnectionError, ProviderRefusal) as err:
            last = err
            log.warning("chat attempt %d/%d failed: %s", attempt, MAX_ATTEMPTS, err)
    raise ExhaustedRetries(MAX_ATTEMPTS, last)


def attempt_loop(request: ChatRequest, provider: ChatProvider,
                 handle_reply: Callable[[object], T]) -> T:
    """Run the full request/coerce/validate cycle under one shared budget.

    handle_reply receives the coerced document and must either return the
    finished value or raise RejectedOutput/Unrepairable to consume the
    attempt and trigger a resend.
    """
    last: Exception | None = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            raw = provider.complete(request)
        except (ProviderConnectionError, ProviderRefusal) as err:
            last = err
            log.warning("attempt %d/%d: provider failed: %s", attempt, MAX_ATTEMPTS, err)
            continue
        try:
            doc = coerce_structured(raw)
            return handle_reply(doc)
        except (Unrepairable, RejectedOutput) as err:
            last = err
            log.warning("attempt %d/%d: reply rejected: %s", attempt, MAX_ATTEMPTS, err)
    raise ExhaustedRetries(MAX_ATTEMPTS, last)


def structured_chat(request: ChatRequest, provider: ChatProvider,
                    validate: Callable[[object], T] | None = None) -> T:
    """Default structured call: coerce, then run the caller's validator."""
    return attempt_loop(request, provider, validate if validate is not None else (lambda doc: doc))


def embed_text(text: str, provider: EmbeddingProvider) -> tuple[float, ...]:
    """Embed one text with transport retries; empty input never reaches the backend."""
    if not text or not text.strip():
        raise ZeroVector("refusing to embed empty text")
    last: Exception | None = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            return provider.embed_raw(text)
        except ProviderConnectionError as err:
            last = err
            log.warning("embed attempt %d/%d failed: %s", attempt, MAX_ATTEMPTS, err)
    raise ExhaustedRetries(MAX_ATTEMPTS, last)


class OpenAIChatProvider:
    """Live chat over an OpenAI-compatible /chat/completions endpoint."""

    def __init__(self, model: str = DEFAULT_CHAT_MODEL, base_url: str | None = None,
                 api_key: str | None = None, timeout: float = 120.0) -> None:
        self.model = model
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL") or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key or os.environ.get("OPENAI_API_KEY")
        self.timeout = timeout
        if not self.api_key:
            raise ConfigurationError("no API key: set OPENAI_API_KEY or pass api_key")

    def complete(self, request: ChatRequest) -> str:
        payload: dict = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        if request.temperature_hint is not None:
            payload["temperature"] = request.temperature_hint
        try:
            response = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as err:
            raise ProviderConnectionError(str(err)) from err
        if response.status_code != 200:
            raise ProviderConnectionError(f"backend answered {response.status_code}: {response.text[:200]}")
        try:
            body = response.json()
            choice = body["choices"][0]
            content = choice["message"]["content"]
            finish = choice.get("finish_reason")
        except (ValueError, LookupError, TypeError) as err:
            raise ProviderConnectionError(f"malformed completion payload: {err}") from err
        if content is None or (isinstance(finish, str) and finish == "content_filter"):
            raise ProviderRefusal(f"backend declined (finish_reason={finish!r})")
        return content


class OpenAIEmbeddingProvider:
    """Live embeddings over an OpenAI-compatible /embeddings endpoint."""

    dimension = 1536

    def __init__(self, model: str = DEFAULT_EMBEDDING_MODEL, base_url: str | None = None,
                 api_key: str | None = None, timeout: float = 60.0) -> None:
        self.model = model
        self.name = model
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL") or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key or os.environ.get("OPENAI_API_KEY")
        self.timeout = timeout
        if not self.api_key:
            raise ConfigurationError("no API key: set OPENAI_API_KEY or pass api_key")

    def embed_raw(self, text: str) -> tuple[float, ...]:
        try:
            response = requests.post(
                f"{self.base_url}/embeddings",
                json={"model": self.model, "input": text},
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as err:
            raise ProviderConnectionError(str(err)) from err
        if response.status_code != 200:
            raise ProviderConnectionError(f"backend answered {response.status_code}: {response.text[:200]}")
        try:
            vector = response.json()["data"][0]["embedding"]
            return tuple(float(v) for v in vector)
        except (ValueError, LookupError, TypeError) as err:
            raise ProviderConnectionError(f"malformed embedding payload: {err}") from err


class LetterFrequencyEmbedding:
    """Deterministic offline embedding: 26 letter counts, case-folded.

    Pure function of the text, so replayed runs need no embedding
    fixtures and results are bit-identical everywhere.
    """

    name = "letterfreq"
    dimension = 26

    def embed_raw(self, text: str) -> tuple[float, ...]:
        counts = [0.0] * 26
        for char in text.lower():
            index = ord(char) - ord("a")
            if 0 <= index < 26:
                counts[index] += 1.0
        return tuple(counts)


class ReplayChatProvider:
    """Serves recorded replies from a fixture store; never touches the network."""

    def __init__(self, store: Path) -> None:
        self.store = Path(store)
        if not self.store.is_dir():
            raise ConfigurationError(f"fixture store does not exist: {self.store}")

    def complete(self, request: ChatRequest) -> str:
        key = request_hash(request)
        path = self.store / key
        if not path.is_file():
            raise FixtureMiss(key)
        return path.read_text(encoding="utf-8")


class RecordingChatProvider:
    """Passes requests to a live provider and writes each reply into the store."""

    def __init__(self, inner: ChatProvider, store: Path) -> None:
        self.inner = inner
        self.store = Path(store)
        self.store.mkdir(parents=True, exist_ok=True)

    def complete(self, request: ChatRequest) -> str:
        reply = self.inner.complete(request)
        (self.store / request_hash(request)).write_text(reply, encoding="utf-8")
        return reply


class ReplayEmbeddingProvider:
    def __init__(self, store: Path, name: str = DEFAULT_EMBEDDING_MODEL, dimension: int = 1536) -> None:
        self.store = Path(store)
        self.name = name
        self.dimension = dimension
        if not self.store.is_dir():
            raise ConfigurationError(f"fixture store does not exist: {self.store}")

    def embed_raw(self, text: str) -> tuple[float, ...]:
        key = embedding_hash(text, self.name, self.dimension)
        path = self.store / key
        if not path.is_file():
            raise FixtureMiss(key)
        return tuple(float(v) for v in json.loads(path.read_text(encoding="utf-8")))


class RecordingEmbeddingProvider:
    def __init__(self, inner: EmbeddingProvider, store: Path) -> None:
        self.inner = inner
        self.store = Path(store)
        self.name = inner.name
        self.dimension = inner.dimension
        self.store.mkdir(parents=True, exist_ok=True)

    def embed_raw(self, text: str) -> tuple[float, ...]:
        vector = self.inner.embed_raw(text)
        key = embedding_hash(text, self.name, self.dimension)
        (self.store / key).write_text(json.dumps(list(vector)), encoding="utf-8")
        return vector


@dataclass(frozen=True)
class Gateway:
    """The provider pair every stage call travels through."""

    chat: ChatProvider
    embedder: EmbeddingProvider


def replay_gateway(store: Path) -> Gateway:
    """Offline gateway: recorded chat replies, deterministic letter-frequency embeddings."""
    return Gateway(chat=ReplayChatProvider(store), embedder=LetterFrequencyEmbedding())


def recording_gateway(store: Path, live_chat: ChatProvider | None = None,
                      live_embedder: EmbeddingProvider | None = None) -> Gateway:
    """Gateway that calls live backends and records every chat reply.

    Raises ConfigurationError when no credential is configured, before
    any request is attempted.
    """
    chat = live_chat if live_chat is not None else OpenAIChatProvider()
    embedder = live_embedder if live_embedder is not None else LetterFrequencyEmbedding()
    return Gateway(chat=RecordingChatProvider(chat, store), embedder=embedder)


def live_gateway(chat_model: str = DEFAULT_CHAT_MODEL, base_url: str | None = None,
                 use_live_embeddings: bool = False) -> Gateway:
    chat = OpenAIChatProvider(model=chat_model, base_url=base_url)
    embedder: EmbeddingProvider
    if use_live_embeddings:
        embedder = OpenAIEmbeddingProvider(base_url=base_url)
    else:
        embedder = LetterFrequencyEmbedding()
    return Gateway(chat=chat, embedder=embedder)
