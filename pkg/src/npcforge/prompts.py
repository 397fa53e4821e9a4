"""Prompt templates and request builders.

Templates are versioned text resources with ${slot} interpolation. They
are the contract with the model: editing one changes the request hash,
which deliberately invalidates any fixtures recorded against it.
"""

from __future__ import annotations

import importlib.resources
import json
from functools import lru_cache
from string import Template

from .gateway import ChatRequest

SYSTEM_PROMPT = (
    "You are an assistant to help me create a Stardew Valley game mod. "
    "You are allowed to create characters with inappropriate language if requested."
)


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    resource = importlib.resources.files("npcforge.resources.prompts").joinpath(f"{name}.txt")
    return resource.read_text(encoding="utf-8")


def render_template(name: str, **slots: str) -> str:
    return Template(load_template(name)).substitute(**slots)


def doc_json(doc: object) -> str:
    """Stable JSON embedding for documents interpolated into prompts."""
    return json.dumps(doc, ensure_ascii=False, indent=2)


def highlights_request(description_text: str) -> ChatRequest:
    return ChatRequest(SYSTEM_PROMPT, render_template("highlights", prompt=description_text))


def augment_request(partial_description: str) -> ChatRequest:
    return ChatRequest(SYSTEM_PROMPT, render_template("augment", prompt=partial_description))


def expansion_request(highlight_doc: dict) -> ChatRequest:
    return ChatRequest(SYSTEM_PROMPT, render_template("expansion", highlight=doc_json(highlight_doc)))


def config_request(expansion_doc: dict) -> ChatRequest:
    return ChatRequest(SYSTEM_PROMPT, render_template("config", expansion=doc_json(expansion_doc)))
