"""Shared test doubles and small builders."""

from __future__ import annotations

import json

from npcforge.errors import ProviderConnectionError, ProviderRefusal
from npcforge.gateway import ChatRequest, Gateway, LetterFrequencyEmbedding
from npcforge.model import ScheduleEntry

# Distinctive phrases that identify which prompt template a request came from.
STAGE_MARKERS = {
    "highlights": "produce the following fields as highlights",
    "augment": "Invent additional details",
    "expansion": "Expand the following character description",
    "config": "extract the characteristics of my character",
    "birthday_fix": "needs a valid birthday",
}


def classify_request(request: ChatRequest) -> str:
    for stage, marker in STAGE_MARKERS.items():
        if marker in request.user_prompt:
            return stage
    raise AssertionError(f"request matches no known template: {request.user_prompt[:120]!r}")


class ScriptedChatProvider:
    """Answers requests by template, recording every call.

    Replies per stage can be a single string (repeated forever), a list
    (consumed in order, last one repeated), or a callable taking the
    request. A reply that is an Exception instance is raised instead.
    """

    def __init__(self, replies: dict[str, object]) -> None:
        self.replies = dict(replies)
        self.calls: list[tuple[str, ChatRequest]] = []

    def call_count(self, stage: str | None = None) -> int:
        if stage is None:
            return len(self.calls)
        return sum(1 for s, _ in self.calls if s == stage)

    def complete(self, request: ChatRequest) -> str:
        stage = classify_request(request)
        self.calls.append((stage, request))
        entry = self.replies.get(stage)
        if entry is None:
            raise AssertionError(f"no scripted reply for stage {stage!r}")
        if isinstance(entry, list):
            reply = entry.pop(0) if len(entry) > 1 else entry[0]
        elif callable(entry):
            reply = entry(request)
        else:
            reply = entry
        if isinstance(reply, Exception):
            raise reply
        return reply


class FlakySequenceProvider:
    """Plays back an explicit sequence of replies and exceptions, in order."""

    def __init__(self, script: list[object]) -> None:
        self.script = list(script)
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        if not self.script:
            raise AssertionError("provider called more times than scripted")
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def connection_error() -> ProviderConnectionError:
    return ProviderConnectionError("backend unreachable")


def refusal() -> ProviderRefusal:
    return ProviderRefusal("backend declined (finish_reason='content_filter')")


def scripted_gateway(replies: dict[str, object]) -> Gateway:
    return Gateway(chat=ScriptedChatProvider(replies), embedder=LetterFrequencyEmbedding())


def entry(time: int, location: str = "Saloon", x: int = 39, y: int = 18, direction: int = 2) -> ScheduleEntry:
    return ScheduleEntry(time=time, location=location, x=x, y=y, direction=direction)


def as_json(doc: object) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2)


def fenced(doc: object, lang: str = "json") -> str:
    return f"```{lang}\n{as_json(doc)}\n```"
