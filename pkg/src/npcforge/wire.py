"""Conversions between model-reply JSON documents and domain types.

Parsers here are the per-attempt validators the stages hand to the
gateway: a shape problem raises RejectedOutput, which consumes one
attempt of the shared budget. They tolerate the model's documented
looseness (birthday spellings, the example's own 'description_qoute'
key, an expansion wrapped in a one-element array) and nothing else.
"""

from __future__ import annotations

from .errors import EnumOutOfRange, InvariantViolation, RejectedOutput
from .model import (
    Birthday,
    CharacterExpansion,
    Highlight,
    Manner,
    Optimism,
    PersonalityProfile,
    ScheduleSummary,
    SocialAnxiety,
    is_ascii_digits,
)

PLACEHOLDER_IMAGE = "portrait.png"

# The model was shown 'description_qoute' in its example, so that spelling
# dominates in replies, but some outputs correct it.
_QUOTE_KEYS = ("description_qoute", "description_quote", "quote")


class BirthdayProblem(RejectedOutput):
    """A card that would be valid except for its birthday field."""

    def __init__(self, doc: dict, detail: str) -> None:
        super().__init__(f"birthday unusable: {detail}")
        self.doc = doc


def _text_field(doc: dict, key: str) -> str | None:
    value = doc.get(key)
    if isinstance(value, str) and value.strip():
        return value
    return None


def _int_field(doc: dict, key: str) -> int | None:
    value = doc.get(key)
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and is_ascii_digits(value.strip()):
        return int(value.strip())
    return None


def parse_highlight(doc: object, fallback_description: str) -> Highlight:
    """Parse one candidate card; RejectedOutput on shape problems.

    When every field except the birthday is usable, raises the narrower
    BirthdayProblem so the stage can re-ask for just that card.
    """
    if not isinstance(doc, dict):
        raise RejectedOutput(f"card must be an object, got {type(doc).__name__}")
    name = _text_field(doc, "name")
    if name is None:
        raise RejectedOutput("card has no usable name")
    age = _int_field(doc, "age")
    if age is None or age <= 0:
        raise RejectedOutput(f"card {name}: no usable age")
    title = _text_field(doc, "title")
    if title is None:
        raise RejectedOutput(f"card {name}: no usable title")
    bullets = doc.get("highlights")
    if not isinstance(bullets, list) or len(bullets) != 4 or not all(
            isinstance(b, str) and b.strip() for b in bullets):
        raise RejectedOutput(f"card {name}: needs exactly 4 non-empty highlight bullets")
    quote = next((text for key in _QUOTE_KEYS if (text := _text_field(doc, key)) is not None), "")
    gender = _text_field(doc, "gender") or "Undefined"
    image = _text_field(doc, "image") or PLACEHOLDER_IMAGE
    description = _text_field(doc, "description") or fallback_description
    raw_birthday = doc.get("birthday")
    if not isinstance(raw_birthday, str):
        raise BirthdayProblem(doc, f"missing or non-text: {raw_birthday!r}")
    try:
        birthday = Birthday.parse(raw_birthday)
    except InvariantViolation as err:
        raise BirthdayProblem(doc, str(err)) from err
    return Highlight(image=image, name=name, age=age, birthday=birthday, gender=gender,
                     title=title, bullets=tuple(bullets), quote=quote, description=description)


def highlight_doc(card: Highlight) -> dict:
    return {
        "image": card.image,
        "name": card.name,
        "age": card.age,
        "birthday": card.birthday.format(),
        "gender": card.gender,
        "title": card.title,
        "highlights": list(card.bullets),
        "description_qoute": card.quote,
        "description": card.description,
    }


_PERSONALITY_KEYS = (
    "characteristics", "job", "hobbies", "foodAndDrinks", "others",
    "manners", "mannersDescription", "socialAnxiety", "socialAnxietyDescription",
    "optimism", "optimismDescription",
)


def parse_expansion_shape(doc: object) -> dict:
    """Validate the trait-sheet reply's shape, leaving enum strings raw.

    Accepts the sheet as a bare object or wrapped in a one-element array
    (the prompt's own wording asks for an array). Enum range checking is
    a separate, later step so it can get its own targeted resend.
    """
    if isinstance(doc, list):
        if not doc:
            raise RejectedOutput("expansion array is empty")
        doc = doc[0]
    if not isinstance(doc, dict):
        raise RejectedOutput(f"expansion must be an object, got {type(doc).__name__}")
    personality = doc.get("personality")
    if not isinstance(personality, dict):
        raise RejectedOutput("expansion has no personality object")
    raw_personality = {}
    for key in _PERSONALITY_KEYS:
        value = personality.get(key)
        if not isinstance(value, str) or not value.strip():
            raise RejectedOutput(f"personality.{key} must be non-empty text")
        raw_personality[key] = value
    dialogues = doc.get("dialogues")
    if not isinstance(dialogues, list) or not dialogues or not all(
            isinstance(line, str) and line.strip() for line in dialogues):
        raise RejectedOutput("dialogues must be a non-empty array of text lines")
    raw_schedules = doc.get("schedules")
    if not isinstance(raw_schedules, list) or not raw_schedules:
        raise RejectedOutput("schedules must be a non-empty array")
    summaries = []
    for item in raw_schedules:
        if not isinstance(item, dict):
            raise RejectedOutput("each schedule summary must be an object")
        title = _text_field(item, "title")
        description = _text_field(item, "description")
        if title is None or description is None:
            raise RejectedOutput("each schedule summary needs title and description")
        summaries.append(ScheduleSummary(title, description))
    portraits = doc.get("portraits")
    if not (isinstance(portraits, list) and all(isinstance(p, str) and p for p in portraits) and portraits):
        image = _text_field(doc, "image")
        portraits = [image] if image else [PLACEHOLDER_IMAGE]
    return {
        "portraits": tuple(portraits),
        "name": _text_field(doc, "name"),
        "gender": _text_field(doc, "gender"),
        "age": _int_field(doc, "age"),
        "birthday": _text_field(doc, "birthday"),
        "title": _text_field(doc, "title"),
        "bullets": doc.get("highlights"),
        "quote": next((t for key in ("quote", *_QUOTE_KEYS) if (t := _text_field(doc, key))), None),
        "summary": _text_field(doc, "summary"),
        "description": _text_field(doc, "description"),
        "personality": raw_personality,
        "dialogues": tuple(dialogues),
        "schedule_summaries": tuple(summaries),
    }


def _personality_from_raw(raw: dict) -> PersonalityProfile:
    """Raises EnumOutOfRange when a trait string falls outside its enum."""
    return PersonalityProfile(
        characteristics=raw["characteristics"],
        job=raw["job"],
        hobbies=raw["hobbies"],
        food_and_drinks=raw["foodAndDrinks"],
        others=raw["others"],
        manners=Manner.parse(raw["manners"]),
        manners_description=raw["mannersDescription"],
        social_anxiety=SocialAnxiety.parse(raw["socialAnxiety"]),
        social_anxiety_description=raw["socialAnxietyDescription"],
        optimism=Optimism.parse(raw["optimism"]),
        optimism_description=raw["optimismDescription"],
    )


def expansion_from_shape(shape: dict, card: Highlight) -> CharacterExpansion:
    """Build the trait sheet, overwriting identity fields from the chosen card.

    Raises EnumOutOfRange when a trait string falls outside its enum;
    the stage gives that one targeted resend before failing.
    """
    personality = _personality_from_raw(shape["personality"])
    return CharacterExpansion(
        portraits=shape["portraits"],
        name=card.name,
        gender=card.gender,
        age=card.age,
        birthday=card.birthday,
        title=card.title,
        bullets=card.bullets,
        quote=shape["quote"] or card.quote,
        summary=shape["summary"] or shape["description"] or card.description,
        description=shape["description"] or card.description,
        personality=personality,
        sample_dialogues=shape["dialogues"],
        schedule_summaries=shape["schedule_summaries"],
    )


def expansion_doc(expansion: CharacterExpansion) -> dict:
    p = expansion.personality
    return {
        "portraits": list(expansion.portraits),
        "name": expansion.name,
        "gender": expansion.gender,
        "age": expansion.age,
        "birthday": expansion.birthday.format(),
        "title": expansion.title,
        "highlights": list(expansion.bullets),
        "quote": expansion.quote,
        "summary": expansion.summary,
        "description": expansion.description,
        "personality": {
            "characteristics": p.characteristics,
            "job": p.job,
            "hobbies": p.hobbies,
            "foodAndDrinks": p.food_and_drinks,
            "others": p.others,
            "manners": str(p.manners),
            "mannersDescription": p.manners_description,
            "socialAnxiety": str(p.social_anxiety),
            "socialAnxietyDescription": p.social_anxiety_description,
            "optimism": str(p.optimism),
            "optimismDescription": p.optimism_description,
        },
        "dialogues": list(expansion.sample_dialogues),
        "schedules": [{"title": s.title, "description": s.description} for s in expansion.schedule_summaries],
    }


def expansion_from_doc(doc: object) -> CharacterExpansion:
    """Re-parse one of our own expansion documents, identity included.

    Used for snapshot restore, where edits may have moved identity
    fields away from the originally selected card; everything must come
    from the stored document itself.
    """
    shape = parse_expansion_shape(doc)
    for key in ("name", "gender", "age", "birthday", "title", "quote", "summary", "description"):
        if shape[key] is None:
            raise RejectedOutput(f"expansion document is missing {key}")
    bullets = shape["bullets"]
    if not isinstance(bullets, list) or len(bullets) != 4 or not all(
            isinstance(b, str) and b.strip() for b in bullets):
        raise RejectedOutput("expansion document needs exactly 4 highlight bullets")
    try:
        birthday = Birthday.parse(shape["birthday"])
    except InvariantViolation as err:
        raise RejectedOutput(f"expansion document birthday: {err}") from err
    return CharacterExpansion(
        portraits=shape["portraits"],
        name=shape["name"],
        gender=shape["gender"],
        age=shape["age"],
        birthday=birthday,
        title=shape["title"],
        bullets=tuple(bullets),
        quote=shape["quote"],
        summary=shape["summary"],
        description=shape["description"],
        personality=_personality_from_raw(shape["personality"]),
        sample_dialogues=shape["dialogues"],
        schedule_summaries=shape["schedule_summaries"],
    )
