"""Stage one: turn the description into three candidate character cards.

Regeneration feeds the model half the original description, asks for
extra invented details, appends those to the full description and runs
the card prompt again on the augmented text. The augmented description
always starts with the complete original, so nothing the user wrote is
lost.
"""

from __future__ import annotations

import logging

from . import prompts, wire
from .errors import (
    ExhaustedRetries,
    ProviderConnectionError,
    ProviderRefusal,
    RejectedOutput,
    StageFailure,
    Unrepairable,
)
from .gateway import MAX_ATTEMPTS, Gateway, chat_complete, coerce_structured
from .model import CharacterDescription, Highlight

log = logging.getLogger(__name__)

CARDS_PER_BATCH = 3

STAGE_NAME = "Highlights"


def first_half(text: str) -> str:
    """First half of the text, split at the whitespace gap nearest to the middle.

    Ties between two equally near gaps go to the earlier one. Text
    without any internal whitespace is returned whole.
    """
    middle = len(text) / 2
    gaps = [index for index, char in enumerate(text) if char.isspace()]
    if not gaps:
        return text
    best = min(gaps, key=lambda index: (abs(index - middle), index))
    return text[:best]


def _extract_cards(doc: object) -> list:
    if isinstance(doc, dict):
        for key in ("highlights", "highlight", "characters", "cards"):
            if isinstance(doc.get(key), list):
                doc = doc[key]
                break
    if not isinstance(doc, list):
        raise RejectedOutput(f"expected an array of cards, got {type(doc).__name__}")
    return doc


def _repair_birthday(card_doc: dict, description: CharacterDescription, gateway: Gateway) -> Highlight | None:
    """One targeted re-ask for a single card whose only defect is its birthday."""
    request = prompts.highlights_request(description.text)
    fix_request = type(request)(
        request.system_prompt,
        "This character card needs a valid birthday in the form '<Season> <day>', for example 'Fall 15', "
        "with the day between 1 and 28. Return the exact same JSON object with only the birthday fixed. "
        "Only print the JSON code.\n\nCard: " + prompts.doc_json(card_doc),
    )
    try:
        raw = gateway.chat.complete(fix_request)
        fixed = coerce_structured(raw)
        if isinstance(fixed, list) and fixed:
            fixed = fixed[0]
        return wire.parse_highlight(fixed, description.text)
    except Exception as err:
        log.warning("birthday repair failed: %s", err)
        return None


def _parse_batch(doc: object, description: CharacterDescription,
                 gateway: Gateway) -> tuple[Highlight, Highlight, Highlight]:
    """Parse a card-array reply, re-asking once per birthday-only failure.

    Valid cards keep their reply order; an over-long array is truncated
    to the first three valid cards.
    """
    items = _extract_cards(doc)
    parsed: list[tuple[int, Highlight]] = []
    for index, item in enumerate(items):
        try:
            parsed.append((index, wire.parse_highlight(item, description.text)))
        except wire.BirthdayProblem as problem:
            if len(parsed) >= CARDS_PER_BATCH:
                continue  # already have enough cards, don't spend a repair call
            repaired = _repair_birthday(problem.doc, description, gateway)
            if repaired is not None:
                parsed.append((index, repaired))
        except RejectedOutput as err:
            log.info("discarding card %d: %s", index, err)
    if len(parsed) < CARDS_PER_BATCH:
        raise RejectedOutput(f"only {len(parsed)} usable cards, need {CARDS_PER_BATCH}")
    parsed.sort(key=lambda pair: pair[0])
    cards = tuple(card for _, card in parsed[:CARDS_PER_BATCH])
    return cards  # type: ignore[return-value]


def generate_highlights(description: CharacterDescription,
                        gateway: Gateway) -> tuple[Highlight, Highlight, Highlight]:
    """Produce exactly three valid cards or raise StageFailure."""
    request = prompts.highlights_request(description.text)
    last: Exception | None = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            raw = gateway.chat.complete(request)
        except (ProviderConnectionError, ProviderRefusal) as err:
            last = err
            log.warning("highlights attempt %d/%d: provider failed: %s", attempt, MAX_ATTEMPTS, err)
            continue
        try:
            return _parse_batch(coerce_structured(raw), description, gateway)
        except (Unrepairable, RejectedOutput) as err:
            last = err
            log.warning("highlights attempt %d/%d: rejected: %s", attempt, MAX_ATTEMPTS, err)
    raise StageFailure(STAGE_NAME, ExhaustedRetries(MAX_ATTEMPTS, last))


def augment_for_regeneration(description: CharacterDescription, gateway: Gateway) -> str:
    """Full original description plus freshly invented details."""
    half = first_half(description.text)
    details = chat_complete(prompts.augment_request(half), gateway.chat).strip()
    if not details:
        return description.text
    return f"{description.text} {details}"


def regenerate_highlight(description: CharacterDescription, gateway: Gateway) -> Highlight:
    """One replacement card generated from the augmented description."""
    try:
        augmented = augment_for_regeneration(description, gateway)
    except ExhaustedRetries as err:
        raise StageFailure(STAGE_NAME, err) from err
    cards = generate_highlights(CharacterDescription(augmented), gateway)
    return cards[0]
