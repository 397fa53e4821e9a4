"""Domain types for the character pipeline.

Everything here is an immutable value object. Constructors enforce the
invariants that must never be observable anywhere downstream (schedule
times in range, exactly four bullets, day maps complete); softer style
rules are reported by lint helpers instead of raised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Union

from .errors import EnumOutOfRange, InvariantViolation, TooShort

MIN_DESCRIPTION_CHARS = 50
BULLETS_PER_CARD = 4
MAX_BULLET_WORDS = 6

DAY_KEYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

MIN_SCHEDULE_TIME = 600
MAX_SCHEDULE_TIME = 2600
MIN_DAY_OF_MONTH = 1
MAX_DAY_OF_MONTH = 10
MIN_BIRTHDAY_DAY = 1
MAX_BIRTHDAY_DAY = 28


def is_ascii_digits(text: str) -> bool:
    """True for non-empty runs of ASCII 0-9 only.

    str.isdigit() alone also accepts superscripts and other unicode
    digit forms that int() then refuses, so every numeric token check
    that feeds int() must go through this instead.
    """
    return text.isascii() and text.isdigit()


@dataclass(frozen=True)
class CharacterDescription:
    """Free-form description text, already validated for minimum length."""

    text: str


def validate_description(text: str) -> CharacterDescription:
    """Trim and length-check raw description input.

    The trimmed text must be at least MIN_DESCRIPTION_CHARS characters;
    the bound is inclusive, so a trimmed length of exactly 50 passes.
    """
    trimmed = text.strip()
    if len(trimmed) < MIN_DESCRIPTION_CHARS:
        raise TooShort(len(trimmed), MIN_DESCRIPTION_CHARS)
    return CharacterDescription(trimmed)


class Season(Enum):
    SPRING = "Spring"
    SUMMER = "Summer"
    FALL = "Fall"
    WINTER = "Winter"

    @classmethod
    def parse(cls, text: str) -> "Season":
        wanted = text.strip().lower()
        for member in cls:
            if member.value.lower() == wanted:
                return member
        raise InvariantViolation(f"unknown season: {text!r}")

    def __str__(self) -> str:
        return self.value


_BIRTHDAY_RE = re.compile(r"^([A-Za-z]+)\s*,?\s*(\d{1,2})$")


@dataclass(frozen=True)
class Birthday:
    """In-game birthday: a season plus a day from 1 to 28."""

    season: Season
    day: int

    def __post_init__(self) -> None:
        if not isinstance(self.day, int) or isinstance(self.day, bool):
            raise InvariantViolation(f"birthday day must be an int, got {self.day!r}")
        if not MIN_BIRTHDAY_DAY <= self.day <= MAX_BIRTHDAY_DAY:
            raise InvariantViolation(f"birthday day {self.day} outside {MIN_BIRTHDAY_DAY}..{MAX_BIRTHDAY_DAY}")

    @classmethod
    def parse(cls, text: str) -> "Birthday":
        """Accepts 'Fall 15' and the model's looser spellings 'Fall, 15' and 'Fall 05'."""
        match = _BIRTHDAY_RE.match(text.strip())
        if match is None:
            raise InvariantViolation(f"unparseable birthday: {text!r}")
        return cls(Season.parse(match.group(1)), int(match.group(2)))

    def format(self) -> str:
        return f"{self.season.value} {self.day}"


class _TraitEnum(Enum):
    """Three-valued trait with case-insensitive parsing and capitalized output."""

    @classmethod
    def parse(cls, text: str) -> "_TraitEnum":
        wanted = str(text).strip().lower()
        for member in cls:
            if member.value.lower() == wanted:
                return member
        raise EnumOutOfRange(cls.__name__, str(text))

    def __str__(self) -> str:
        return self.value


class Manner(_TraitEnum):
    POLITE = "Polite"
    RUDE = "Rude"
    NEUTRAL = "Neutral"


class SocialAnxiety(_TraitEnum):
    OUTGOING = "Outgoing"
    SHY = "Shy"
    NEUTRAL = "Neutral"


class Optimism(_TraitEnum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


def _require_text(value: object, what: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise InvariantViolation(f"{what} must be non-empty text, got {value!r}")
    return value


@dataclass(frozen=True)
class Highlight:
    """One candidate character card from the first stage."""

    image: str
    name: str
    age: int
    birthday: Birthday
    gender: str
    title: str
    bullets: tuple[str, ...]
    quote: str
    description: str

    def __post_init__(self) -> None:
        _require_text(self.name, "highlight name")
        _require_text(self.title, "highlight title")
        if not isinstance(self.age, int) or isinstance(self.age, bool) or self.age <= 0:
            raise InvariantViolation(f"age must be a positive int, got {self.age!r}")
        if len(self.bullets) != BULLETS_PER_CARD:
            raise InvariantViolation(f"a card needs exactly {BULLETS_PER_CARD} bullets, got {len(self.bullets)}")
        for bullet in self.bullets:
            _require_text(bullet, "highlight bullet")


def lint_highlight(card: Highlight) -> list[str]:
    """Style warnings that never block the pipeline."""
    warnings = []
    for index, bullet in enumerate(card.bullets):
        words = len(bullet.split())
        if words > MAX_BULLET_WORDS:
            warnings.append(f"bullet {index} has {words} words, prefer {MAX_BULLET_WORDS} or fewer: {bullet!r}")
    return warnings


@dataclass(frozen=True)
class PersonalityProfile:
    """Trait sheet personality block; three fields are closed enums."""

    characteristics: str
    job: str
    hobbies: str
    food_and_drinks: str
    others: str
    manners: Manner
    manners_description: str
    social_anxiety: SocialAnxiety
    social_anxiety_description: str
    optimism: Optimism
    optimism_description: str

    def __post_init__(self) -> None:
        for name in ("characteristics", "job", "hobbies", "food_and_drinks", "others",
                     "manners_description", "social_anxiety_description", "optimism_description"):
            _require_text(getattr(self, name), f"personality {name}")


@dataclass(frozen=True)
class ScheduleSummary:
    """Prose summary of one day-pattern in the character's routine."""

    title: str
    description: str

    def __post_init__(self) -> None:
        _require_text(self.title, "schedule summary title")
        _require_text(self.description, "schedule summary description")


@dataclass(frozen=True)
class CharacterExpansion:
    """Full trait sheet produced by the second stage."""

    portraits: tuple[str, ...]
    name: str
    gender: str
    age: int
    birthday: Birthday
    title: str
    bullets: tuple[str, ...]
    quote: str
    summary: str
    description: str
    personality: PersonalityProfile
    sample_dialogues: tuple[str, ...]
    schedule_summaries: tuple[ScheduleSummary, ...]

    def __post_init__(self) -> None:
        _require_text(self.name, "expansion name")
        if not isinstance(self.age, int) or isinstance(self.age, bool) or self.age <= 0:
            raise InvariantViolation(f"age must be a positive int, got {self.age!r}")
        if len(self.bullets) != BULLETS_PER_CARD:
            raise InvariantViolation(f"expansion needs exactly {BULLETS_PER_CARD} bullets, got {len(self.bullets)}")
        if not self.sample_dialogues:
            raise InvariantViolation("expansion needs at least one sample dialogue line")
        if not self.schedule_summaries:
            raise InvariantViolation("expansion needs at least one schedule summary")
        for line in self.sample_dialogues:
            _require_text(line, "sample dialogue")


@dataclass(frozen=True)
class ScheduleEntry:
    """One movement: at `time`, stand at (x, y) in `location` facing `direction`."""

    time: int
    location: str
    x: int
    y: int
    direction: int

    def __post_init__(self) -> None:
        for name in ("time", "x", "y", "direction"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvariantViolation(f"schedule {name} must be an int, got {value!r}")
        if not MIN_SCHEDULE_TIME <= self.time <= MAX_SCHEDULE_TIME:
            raise InvariantViolation(f"schedule time {self.time} outside {MIN_SCHEDULE_TIME}..{MAX_SCHEDULE_TIME}")
        if self.time % 10 != 0:
            raise InvariantViolation(f"schedule time {self.time} is not a multiple of 10")
        if not 0 <= self.direction <= 3:
            raise InvariantViolation(f"facing direction {self.direction} outside 0..3")
        _require_text(self.location, "schedule location")


@dataclass(frozen=True)
class DailySchedule:
    """A full week: every day key maps to a non-empty run of entries with strictly increasing times."""

    days: Mapping[str, tuple[ScheduleEntry, ...]]

    def __post_init__(self) -> None:
        missing = [day for day in DAY_KEYS if day not in self.days]
        if missing:
            raise InvariantViolation(f"schedule is missing day keys: {missing}")
        unknown = [day for day in self.days if day not in DAY_KEYS]
        if unknown:
            raise InvariantViolation(f"schedule has unknown day keys: {unknown}")
        for day in DAY_KEYS:
            entries = self.days[day]
            if not entries:
                raise InvariantViolation(f"{day} has no schedule entries")
            times = [entry.time for entry in entries]
            if any(later <= earlier for earlier, later in zip(times, times[1:])):
                raise InvariantViolation(f"{day} times are not strictly increasing: {times}")

    def __getitem__(self, day: str) -> tuple[ScheduleEntry, ...]:
        return self.days[day]

    def items(self) -> Iterator[tuple[str, tuple[ScheduleEntry, ...]]]:
        for day in DAY_KEYS:
            yield day, self.days[day]


@dataclass(frozen=True)
class DayOfWeekKey:
    day: str

    def __post_init__(self) -> None:
        if self.day not in DAY_KEYS:
            raise InvariantViolation(f"unknown day-of-week key: {self.day!r}")


@dataclass(frozen=True)
class DayOfMonthKey:
    day: int

    def __post_init__(self) -> None:
        if not isinstance(self.day, int) or isinstance(self.day, bool):
            raise InvariantViolation(f"day of month must be an int, got {self.day!r}")
        if not MIN_DAY_OF_MONTH <= self.day <= MAX_DAY_OF_MONTH:
            raise InvariantViolation(f"day of month {self.day} outside {MIN_DAY_OF_MONTH}..{MAX_DAY_OF_MONTH}")


@dataclass(frozen=True)
class LocationKey:
    """Dialogue spoken when the player meets the character at a map tile."""

    location: str
    x: int
    y: int

    def __post_init__(self) -> None:
        _require_text(self.location, "location key name")
        if not self.location[0].isalpha():
            raise InvariantViolation(f"location key must start with a letter: {self.location!r}")
        for name in ("x", "y"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise InvariantViolation(f"location key {name} must be a non-negative int, got {value!r}")


DialogueKey = Union[DayOfWeekKey, DayOfMonthKey, LocationKey]


@dataclass(frozen=True)
class DialogueSet:
    """Ordered dialogue lines keyed by when or where they trigger."""

    entries: Mapping[DialogueKey, str]

    def __post_init__(self) -> None:
        for key, line in self.entries.items():
            if not isinstance(key, (DayOfWeekKey, DayOfMonthKey, LocationKey)):
                raise InvariantViolation(f"bad dialogue key type: {key!r}")
            _require_text(line, f"dialogue line for {key}")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class GiftDialogues:
    """Reaction lines for the five gift tastes."""

    love: str
    like: str
    dislike: str
    hate: str
    neutral: str

    def __post_init__(self) -> None:
        for name in ("love", "like", "dislike", "hate", "neutral"):
            _require_text(getattr(self, name), f"gift reaction {name}")


@dataclass(frozen=True)
class GiftPreferences:
    """Catalog item names the character loves, likes, dislikes and hates.

    The four lists are pairwise disjoint by construction.
    """

    loves: tuple[str, ...] = ()
    likes: tuple[str, ...] = ()
    dislikes: tuple[str, ...] = ()
    hates: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        lists = {"loves": self.loves, "likes": self.likes, "dislikes": self.dislikes, "hates": self.hates}
        for name, values in lists.items():
            if len(set(values)) != len(values):
                raise InvariantViolation(f"duplicate items inside {name}: {values}")
        names = list(lists)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                overlap = set(lists[first]) & set(lists[second])
                if overlap:
                    raise InvariantViolation(f"{first} and {second} share items: {sorted(overlap)}")


@dataclass(frozen=True)
class ModPack:
    """The finished content pack: four documents plus binary assets."""

    manifest: Mapping[str, object]
    content: Mapping[str, object]
    dialogues: Mapping[str, object]
    schedules: Mapping[str, str]
    assets: Mapping[str, bytes] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.assets) < 2:
            raise InvariantViolation(f"a pack needs at least 2 assets, got {len(self.assets)}")
        for name, data in self.assets.items():
            if not isinstance(data, bytes):
                raise InvariantViolation(f"asset {name} must be bytes")
