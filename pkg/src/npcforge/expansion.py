"""Stage two: expand one chosen card into the full trait sheet.

Identity fields the user already saw on the card (name, age, birthday,
gender, title, bullets) are never allowed to drift: whatever the model
replies, they are overwritten from the card.

A reply whose only defect is an out-of-range trait enum gets exactly one
targeted resend on top of the normal budget; a second enum failure ends
the stage.
"""

from __future__ import annotations

import logging
from dataclasses import replace

from . import prompts, wire
from .errors import (
    EnumOutOfRange,
    ExhaustedRetries,
    InvariantViolation,
    StageFailure,
    UnknownField,
)
from .gateway import Gateway, attempt_loop
from .model import (
    Birthday,
    CharacterDescription,
    CharacterExpansion,
    Highlight,
    Manner,
    Optimism,
    SocialAnxiety,
    is_ascii_digits,
)

log = logging.getLogger(__name__)

STAGE_NAME = "Expansion"


def expand_highlight(card: Highlight, description: CharacterDescription,
                     gateway: Gateway) -> CharacterExpansion:
    """Run the trait-sheet prompt for the chosen card."""
    request = prompts.expansion_request(wire.highlight_doc(card))
    try:
        shape = attempt_loop(request, gateway.chat, wire.parse_expansion_shape)
    except ExhaustedRetries as err:
        raise StageFailure(STAGE_NAME, err) from err
    try:
        return wire.expansion_from_shape(shape, card)
    except EnumOutOfRange as first_err:
        log.warning("trait enum out of range (%s), one targeted resend", first_err)
        retry_request = type(request)(
            request.system_prompt,
            request.user_prompt
            + "\n\nImportant: the manners field must be exactly one of Polite, Rude, Neutral; "
              "socialAnxiety exactly one of Outgoing, Shy, Neutral; "
              "optimism exactly one of Positive, Negative, Neutral.",
        )
        try:
            shape = attempt_loop(retry_request, gateway.chat, wire.parse_expansion_shape)
            return wire.expansion_from_shape(shape, card)
        except (ExhaustedRetries, EnumOutOfRange) as err:
            raise StageFailure(STAGE_NAME, err) from err


_ENUM_FIELDS = {
    "manners": Manner,
    "socialAnxiety": SocialAnxiety,
    "optimism": Optimism,
}

_PERSONALITY_TEXT_FIELDS = {
    "characteristics": "characteristics",
    "job": "job",
    "hobbies": "hobbies",
    "foodAndDrinks": "food_and_drinks",
    "others": "others",
    "mannersDescription": "manners_description",
    "socialAnxietyDescription": "social_anxiety_description",
    "optimismDescription": "optimism_description",
}

_TOP_TEXT_FIELDS = ("name", "gender", "title", "quote", "summary", "description")


def apply_trait_edit(expansion: CharacterExpansion, field_path: str, value: str) -> CharacterExpansion:
    """Apply one user edit addressed by dotted field path.

    Supported paths: top-level identity and prose fields, personality.*,
    sampleDialogues.<i> (empty value removes the line, the last line
    cannot be removed) and scheduleSummaries.<i>.title/.description.
    Edits are local: every unaddressed field survives unchanged.
    """
    head, _, rest = field_path.partition(".")
    if head == "age":
        if rest:
            raise UnknownField(field_path)
        text = str(value).strip()
        if not is_ascii_digits(text) or int(text) <= 0:
            raise InvariantViolation(f"age must be a positive whole number, got {value!r}")
        return replace(expansion, age=int(text))
    if head == "birthday":
        if rest:
            raise UnknownField(field_path)
        return replace(expansion, birthday=Birthday.parse(str(value)))
    if head in _TOP_TEXT_FIELDS:
        if rest:
            raise UnknownField(field_path)
        if not str(value).strip():
            raise InvariantViolation(f"{head} cannot be emptied")
        return replace(expansion, **{head: str(value)})
    if head == "personality":
        return replace(expansion, personality=_edit_personality(expansion, rest, value, field_path))
    if head == "sampleDialogues":
        return _edit_dialogue(expansion, rest, value, field_path)
    if head == "scheduleSummaries":
        return _edit_summary(expansion, rest, value, field_path)
    raise UnknownField(field_path)


def _edit_personality(expansion: CharacterExpansion, field: str, value: str, path: str):
    if field in _ENUM_FIELDS:
        parsed = _ENUM_FIELDS[field].parse(str(value))
        attr = {"manners": "manners", "socialAnxiety": "social_anxiety", "optimism": "optimism"}[field]
        return replace(expansion.personality, **{attr: parsed})
    if field in _PERSONALITY_TEXT_FIELDS:
        if not str(value).strip():
            raise InvariantViolation(f"personality.{field} cannot be emptied")
        return replace(expansion.personality, **{_PERSONALITY_TEXT_FIELDS[field]: str(value)})
    raise UnknownField(path)


def _index(rest: str, path: str) -> tuple[int, str]:
    index_text, _, tail = rest.partition(".")
    if not is_ascii_digits(index_text):
        raise UnknownField(path)
    return int(index_text), tail


def _edit_dialogue(expansion: CharacterExpansion, rest: str, value: str, path: str) -> CharacterExpansion:
    index, tail = _index(rest, path)
    if tail:
        raise UnknownField(path)
    lines = list(expansion.sample_dialogues)
    if index >= len(lines):
        raise UnknownField(path)
    if not str(value).strip():
        if len(lines) == 1:
            raise InvariantViolation("cannot remove the last sample dialogue line")
        del lines[index]
    else:
        lines[index] = str(value)
    return replace(expansion, sample_dialogues=tuple(lines))


def _edit_summary(expansion: CharacterExpansion, rest: str, value: str, path: str) -> CharacterExpansion:
    index, tail = _index(rest, path)
    summaries = list(expansion.schedule_summaries)
    if index >= len(summaries):
        raise UnknownField(path)
    if tail not in ("title", "description"):
        raise UnknownField(path)
    if not str(value).strip():
        raise InvariantViolation(f"scheduleSummaries.{index}.{tail} cannot be emptied")
    summaries[index] = replace(summaries[index], **{tail: str(value)})
    return replace(expansion, schedule_summaries=tuple(summaries))
