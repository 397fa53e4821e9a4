"""Schedule-string and dialogue-key grammar.

This module owns the two tiny text formats the game reads:

  schedule day strings   "900 SeedShop 21 19 2 /1300 Saloon 39 18 2"
  dialogue keys          "Mon" | "7" | "Mountain_76_14"

plus the closed whitelist of (location, x, y, direction) tuples a
schedule entry may use. Parsers are lenient about whitespace only;
serializers always emit the canonical form, so serialize(parse(s)) is a
fixed point of serialize for every accepted s.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path

from .errors import ForgeError, InvariantViolation
from .model import (
    DAY_KEYS,
    MAX_DAY_OF_MONTH,
    MIN_DAY_OF_MONTH,
    MIN_SCHEDULE_TIME,
    DailySchedule,
    DayOfMonthKey,
    DayOfWeekKey,
    DialogueKey,
    LocationKey,
    ScheduleEntry,
    is_ascii_digits,
)

ENTRY_SEPARATOR = " /"


class ScheduleSyntaxError(ForgeError):
    """A schedule day string or entry does not match the grammar."""


class BadDialogueKey(ForgeError):
    """A dialogue key string matches none of the three key variants."""

    def __init__(self, text: str, reason: str) -> None:
        super().__init__(f"bad dialogue key {text!r}: {reason}")
        self.text = text
        self.reason = reason


def _int_token(token: str, what: str, source: str) -> int:
    if not is_ascii_digits(token):
        raise ScheduleSyntaxError(f"{what} must be digits in {source!r}, got {token!r}")
    return int(token)


def parse_schedule_entry(text: str) -> ScheduleEntry:
    """Parse one 'TIME Location X Y D' entry."""
    tokens = text.split()
    if len(tokens) != 5:
        raise ScheduleSyntaxError(f"expected 5 fields 'TIME Location X Y D', got {len(tokens)} in {text!r}")
    time = _int_token(tokens[0], "time", text)
    x = _int_token(tokens[2], "x", text)
    y = _int_token(tokens[3], "y", text)
    direction = _int_token(tokens[4], "direction", text)
    try:
        return ScheduleEntry(time=time, location=tokens[1], x=x, y=y, direction=direction)
    except InvariantViolation as err:
        raise ScheduleSyntaxError(f"bad entry {text!r}: {err}") from err


def serialize_schedule_entry(entry: ScheduleEntry) -> str:
    return f"{entry.time} {entry.location} {entry.x} {entry.y} {entry.direction}"


def parse_day_schedule(text: str) -> tuple[ScheduleEntry, ...]:
    """Parse a '/'-separated run of entries for one day."""
    if not isinstance(text, str) or not text.strip():
        raise ScheduleSyntaxError(f"day schedule must be non-empty text, got {text!r}")
    segments = [segment for segment in text.split("/")]
    entries = []
    for segment in segments:
        if not segment.strip():
            raise ScheduleSyntaxError(f"empty entry segment in {text!r}")
        entries.append(parse_schedule_entry(segment))
    return tuple(entries)


def serialize_day_schedule(entries: tuple[ScheduleEntry, ...]) -> str:
    return ENTRY_SEPARATOR.join(serialize_schedule_entry(entry) for entry in entries)


def parse_daily_schedule(doc: dict) -> DailySchedule:
    """Parse a {day: string} document into a validated week."""
    if not isinstance(doc, dict):
        raise ScheduleSyntaxError(f"schedule must be an object of day strings, got {type(doc).__name__}")
    days = {}
    for day, text in doc.items():
        if day not in DAY_KEYS:
            raise ScheduleSyntaxError(f"unknown schedule day key: {day!r}")
        days[day] = parse_day_schedule(text)
    try:
        return DailySchedule(days)
    except InvariantViolation as err:
        raise ScheduleSyntaxError(str(err)) from err


def serialize_daily_schedule(schedule: DailySchedule) -> dict[str, str]:
    return {day: serialize_day_schedule(entries) for day, entries in schedule.items()}


def parse_dialogue_key(text: str) -> DialogueKey:
    """Classify a dialogue key string into exactly one of the three variants.

    Location keys are '<name>_<x>_<y>': strip the maximal trailing run of
    all-numeric segments and require exactly two of them, so underscored
    map names like BathHouse_Entry_5_4 parse and Mountain_76_14_2 (a stray
    facing direction) is rejected.
    """
    if not isinstance(text, str):
        raise BadDialogueKey(repr(text), "key must be a string")
    if text in DAY_KEYS:
        return DayOfWeekKey(text)
    if is_ascii_digits(text):
        day = int(text)
        if MIN_DAY_OF_MONTH <= day <= MAX_DAY_OF_MONTH and str(day) == text:
            return DayOfMonthKey(day)
        raise BadDialogueKey(text, f"day of month must be {MIN_DAY_OF_MONTH}..{MAX_DAY_OF_MONTH} without leading zeros")
    segments = text.split("_")
    numeric_tail = 0
    while numeric_tail < len(segments) and is_ascii_digits(segments[-1 - numeric_tail]):
        numeric_tail += 1
    if numeric_tail != 2:
        raise BadDialogueKey(text, f"expected exactly 2 trailing coordinates, found {numeric_tail}")
    name = "_".join(segments[:-2])
    if not name or not name[0].isalpha():
        raise BadDialogueKey(text, "location name must be non-empty and start with a letter")
    try:
        return LocationKey(name, int(segments[-2]), int(segments[-1]))
    except InvariantViolation as err:
        raise BadDialogueKey(text, str(err)) from err


def serialize_dialogue_key(key: DialogueKey) -> str:
    if isinstance(key, DayOfWeekKey):
        return key.day
    if isinstance(key, DayOfMonthKey):
        return str(key.day)
    if isinstance(key, LocationKey):
        return f"{key.location}_{key.x}_{key.y}"
    raise InvariantViolation(f"not a dialogue key: {key!r}")


@dataclass(frozen=True)
class LocationWhitelist:
    """Closed set of legal schedule stops."""

    entries: tuple[ScheduleEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise InvariantViolation("whitelist is empty")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, spot: tuple[str, int, int, int]) -> bool:
        return spot in self._tuples()

    def allows(self, entry: ScheduleEntry) -> bool:
        return (entry.location, entry.x, entry.y, entry.direction) in self._tuples()

    def allows_tile(self, location: str, x: int, y: int) -> bool:
        """True when some whitelisted stop sits on this tile, any facing."""
        return (location, x, y) in self._tiles()

    def locations(self) -> frozenset[str]:
        return frozenset(entry.location for entry in self.entries)

    def nearest(self, location: str, x: int, y: int) -> ScheduleEntry | None:
        """Closest whitelisted stop in the same location, or None if the name is unknown."""
        best = None
        best_distance = None
        for entry in self.entries:
            if entry.location != location:
                continue
            distance = (entry.x - x) ** 2 + (entry.y - y) ** 2
            if best_distance is None or distance < best_distance:
                best = entry
                best_distance = distance
        return best

    def _tuples(self) -> frozenset[tuple[str, int, int, int]]:
        cached = getattr(self, "_tuple_cache", None)
        if cached is None:
            cached = frozenset((e.location, e.x, e.y, e.direction) for e in self.entries)
            object.__setattr__(self, "_tuple_cache", cached)
        return cached

    def _tiles(self) -> frozenset[tuple[str, int, int]]:
        cached = getattr(self, "_tile_cache", None)
        if cached is None:
            cached = frozenset((e.location, e.x, e.y) for e in self.entries)
            object.__setattr__(self, "_tile_cache", cached)
        return cached

    @classmethod
    def from_lines(cls, lines: list[str]) -> "LocationWhitelist":
        entries = []
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 4:
                raise InvariantViolation(f"whitelist line needs 'Location X Y D': {line!r}")
            # Whitelist rows carry no time; store a fixed legal placeholder so
            # rows can reuse the ScheduleEntry validators.
            entries.append(ScheduleEntry(time=MIN_SCHEDULE_TIME, location=tokens[0],
                                         x=int(tokens[1]), y=int(tokens[2]), direction=int(tokens[3])))
        return cls(tuple(entries))

    @classmethod
    def load(cls, path: Path) -> "LocationWhitelist":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())

    @classmethod
    def bundled(cls) -> "LocationWhitelist":
        text = importlib.resources.files("npcforge.resources").joinpath("whitelist.txt").read_text(encoding="utf-8")
        return cls.from_lines(text.splitlines())
