"""End-to-end composition of the three stages into a finished pack."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .configgen import ConfigBundle, generate_config, lint_config
from .emitter import DEFAULT_AUTHOR, DEFAULT_VERSION, build_pack
from .expansion import expand_highlight
from .gateway import Gateway
from .gifts import ItemCatalog, build_gift_preferences, ensure_catalog_embeddings
from .grammar import LocationWhitelist
from .highlights import generate_highlights
from .model import (
    CharacterDescription,
    CharacterExpansion,
    GiftPreferences,
    Highlight,
    ModPack,
    lint_highlight,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineResult:
    highlights: tuple[Highlight, Highlight, Highlight]
    selected: int
    expansion: CharacterExpansion
    bundle: ConfigBundle
    preferences: GiftPreferences
    pack: ModPack
    notices: tuple[str, ...]


def finish_expansion(expansion: CharacterExpansion, whitelist: LocationWhitelist,
                     catalog: ItemCatalog, gateway: Gateway,
                     author: str = DEFAULT_AUTHOR, version: str = DEFAULT_VERSION,
                     taken_ids: tuple[str, ...] = ()) -> tuple[ConfigBundle, GiftPreferences, ModPack, tuple[str, ...]]:
    """Stage three plus gift matching plus pack assembly for one trait sheet."""
    bundle = generate_config(expansion, whitelist, gateway)
    catalog = ensure_catalog_embeddings(catalog, gateway.embedder)
    preferences, warnings = build_gift_preferences(expansion.personality, catalog, gateway.embedder)
    notices = list(warnings)
    notices.extend(lint_config(bundle, whitelist))
    pack = build_pack(expansion, bundle, preferences, author=author, version=version, taken_ids=taken_ids)
    return bundle, preferences, pack, tuple(notices)


def run_pipeline(description: CharacterDescription, gateway: Gateway,
                 whitelist: LocationWhitelist, catalog: ItemCatalog,
                 select: int = 0, author: str = DEFAULT_AUTHOR,
                 version: str = DEFAULT_VERSION) -> PipelineResult:
    """Description to pack in one pass, selecting one of the three cards."""
    if not 0 <= select <= 2:
        raise ValueError(f"card selection must be 0..2, got {select}")
    cards = generate_highlights(description, gateway)
    notices = []
    for index, card in enumerate(cards):
        notices.extend(f"card {index}: {warning}" for warning in lint_highlight(card))
    log.info("generated cards: %s", ", ".join(card.title for card in cards))
    expansion = expand_highlight(cards[select], description, gateway)
    bundle, preferences, pack, finish_notices = finish_expansion(
        expansion, whitelist, catalog, gateway, author=author, version=version)
    notices.extend(finish_notices)
    return PipelineResult(
        highlights=cards,
        selected=select,
        expansion=expansion,
        bundle=bundle,
        preferences=preferences,
        pack=pack,
        notices=tuple(notices),
    )
