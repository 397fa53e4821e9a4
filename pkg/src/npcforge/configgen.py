"""Stage three: schedules, dialogues and gift reactions, strictly validated.

validate_config is a total function over arbitrary parsed JSON: it
returns a typed ConfigBundle when the document is fully clean and a
ViolationReport otherwise, never raising. repair_config applies only
conservative fixes (dropping or substituting single schedule stops,
copying Monday onto Wednesday and Friday, dropping bad dialogue keys,
truncating an over-long dialogue map); anything structural triggers a
resend instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from . import prompts, wire
from .errors import ExhaustedRetries, RejectedOutput, StageFailure, Unrepairable
from .gateway import Gateway, attempt_loop
from .grammar import (
    BadDialogueKey as BadKeyError,
    LocationWhitelist,
    ScheduleSyntaxError,
    parse_dialogue_key,
    parse_day_schedule,
    parse_schedule_entry,
    serialize_daily_schedule,
    serialize_day_schedule,
    serialize_dialogue_key,
)
from .model import (
    DAY_KEYS,
    MAX_SCHEDULE_TIME,
    MIN_SCHEDULE_TIME,
    CharacterExpansion,
    DailySchedule,
    DialogueSet,
    GiftDialogues,
    LocationKey,
    ScheduleEntry,
    is_ascii_digits,
)

log = logging.getLogger(__name__)

STAGE_NAME = "Config"

MIN_DIALOGUES = 15
MAX_DIALOGUES = 20

GIFT_CATEGORIES = ("love", "like", "dislike", "hate", "neutral")

REST_DAYS = ("Sat", "Sun")
MIRROR_DAYS = ("Wed", "Fri")  # must equal Mon
DISTINCT_DAYS = ("Tue", "Thu")  # must differ from Mon


class ViolationCategory(str, Enum):
    BAD_SCHEDULE_SYNTAX = "BadScheduleSyntax"
    OFF_WHITELIST = "OffWhitelist"
    BAD_DIALOGUE_KEY = "BadDialogueKey"
    DAY_RULE_VIOLATION = "DayRuleViolation"
    DIALOGUE_COUNT_OUT_OF_RANGE = "DialogueCountOutOfRange"
    MISSING_GIFT_CATEGORY = "MissingGiftCategory"


@dataclass(frozen=True)
class Violation:
    category: ViolationCategory
    where: str
    detail: str


@dataclass(frozen=True)
class ViolationReport:
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return bool(self.violations)

    def categories(self) -> frozenset[ViolationCategory]:
        return frozenset(v.category for v in self.violations)

    def describe(self) -> str:
        return "\n".join(f"{v.category.value} at {v.where}: {v.detail}" for v in self.violations)


@dataclass(frozen=True)
class ConfigBundle:
    """Validated stage-three output."""

    schedule: DailySchedule
    dialogues: DialogueSet
    gift_dialogues: GiftDialogues


def bundle_doc(bundle: ConfigBundle) -> dict:
    """Serialize a bundle back to the raw document shape."""
    return {
        "schedule": serialize_daily_schedule(bundle.schedule),
        "dialogues": {serialize_dialogue_key(key): line for key, line in bundle.dialogues.entries.items()},
        "giftDialogues": {category: getattr(bundle.gift_dialogues, category) for category in GIFT_CATEGORIES},
    }


def _check_day_rules(days: dict[str, tuple[ScheduleEntry, ...]], add) -> None:
    """State-machine rules over canonical day strings: Mon=Wed=Fri, Tue and Thu differ."""
    canonical = {day: serialize_day_schedule(entries) for day, entries in days.items()}
    for day in MIRROR_DAYS:
        if canonical[day] != canonical["Mon"]:
            add(ViolationCategory.DAY_RULE_VIOLATION, f"schedule.{day}",
                f"{day} must repeat Monday's schedule")
    for day in DISTINCT_DAYS:
        if canonical[day] == canonical["Mon"]:
            add(ViolationCategory.DAY_RULE_VIOLATION, f"schedule.{day}",
                f"{day} must differ from Monday's schedule")


def validate_config(doc: object, whitelist: LocationWhitelist) -> ConfigBundle | ViolationReport:
    """Total check of a raw stage-three document."""
    violations: list[Violation] = []

    def add(category: ViolationCategory, where: str, detail: str) -> None:
        violations.append(Violation(category, where, detail))

    if not isinstance(doc, dict):
        add(ViolationCategory.BAD_SCHEDULE_SYNTAX, "$", f"document must be an object, got {type(doc).__name__}")
        return ViolationReport(tuple(violations))

    schedule_days: dict[str, tuple[ScheduleEntry, ...]] = {}
    schedule = doc.get("schedule")
    if not isinstance(schedule, dict):
        add(ViolationCategory.BAD_SCHEDULE_SYNTAX, "schedule", "missing schedule object")
    else:
        for day in schedule:
            if day not in DAY_KEYS:
                add(ViolationCategory.BAD_SCHEDULE_SYNTAX, f"schedule.{day}", "unknown day key")
        for day in DAY_KEYS:
            if day not in schedule:
                add(ViolationCategory.BAD_SCHEDULE_SYNTAX, f"schedule.{day}", "day missing")
                continue
            value = schedule[day]
            if not isinstance(value, str):
                add(ViolationCategory.BAD_SCHEDULE_SYNTAX, f"schedule.{day}",
                    f"day must be a schedule string, got {type(value).__name__}")
                continue
            entries, day_violations = _scan_day(day, value, whitelist)
            violations.extend(day_violations)
            if entries is not None:
                schedule_days[day] = entries
        if len(schedule_days) == len(DAY_KEYS):
            _check_day_rules(schedule_days, add)

    dialogue_entries: dict = {}
    dialogues = doc.get("dialogues")
    if not isinstance(dialogues, dict):
        add(ViolationCategory.DIALOGUE_COUNT_OUT_OF_RANGE, "dialogues", "missing dialogues object")
    else:
        count = len(dialogues)
        if not MIN_DIALOGUES <= count <= MAX_DIALOGUES:
            add(ViolationCategory.DIALOGUE_COUNT_OUT_OF_RANGE, "dialogues",
                f"{count} dialogue lines, need {MIN_DIALOGUES}..{MAX_DIALOGUES}")
        for key, line in dialogues.items():
            try:
                parsed_key = parse_dialogue_key(key)
            except BadKeyError as err:
                add(ViolationCategory.BAD_DIALOGUE_KEY, f"dialogues.{key}", err.reason)
                continue
            if not isinstance(line, str) or not line.strip():
                add(ViolationCategory.BAD_DIALOGUE_KEY, f"dialogues.{key}", "dialogue line must be non-empty text")
                continue
            dialogue_entries[parsed_key] = line

    gift_values: dict[str, str] = {}
    gifts = doc.get("giftDialogues")
    if not isinstance(gifts, dict):
        gifts = {}
    for category in GIFT_CATEGORIES:
        value = gifts.get(category)
        if not isinstance(value, str) or not value.strip():
            add(ViolationCategory.MISSING_GIFT_CATEGORY, f"giftDialogues.{category}",
                "gift reaction missing or empty")
        else:
            gift_values[category] = value

    if violations:
        return ViolationReport(tuple(violations))
    return ConfigBundle(
        schedule=DailySchedule(schedule_days),
        dialogues=DialogueSet(dialogue_entries),
        gift_dialogues=GiftDialogues(**gift_values),
    )


def _scan_day(day: str, text: str, whitelist: LocationWhitelist):
    """Validate one day string, reporting per-entry problems.

    Returns (entries or None, violations). Entries are returned only
    when the whole day parses, so day-rule checks run on real values.
    """
    violations: list[Violation] = []
    try:
        entries = parse_day_schedule(text)
    except ScheduleSyntaxError as err:
        violations.append(Violation(ViolationCategory.BAD_SCHEDULE_SYNTAX, f"schedule.{day}", str(err)))
        # still report whitelist problems on the segments that do parse
        for index, segment in enumerate(text.split("/")):
            try:
                entry = parse_schedule_entry(segment)
            except ScheduleSyntaxError:
                continue
            if not whitelist.allows(entry):
                violations.append(Violation(
                    ViolationCategory.OFF_WHITELIST, f"schedule.{day}[{index}]",
                    f"{segment.strip()!r} is not a whitelisted stop"))
        return None, violations
    for index, entry in enumerate(entries):
        if not whitelist.allows(entry):
            violations.append(Violation(
                ViolationCategory.OFF_WHITELIST, f"schedule.{day}[{index}]",
                f"{serialize_day_schedule((entry,))!r} is not a whitelisted stop"))
    times = [entry.time for entry in entries]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        violations.append(Violation(ViolationCategory.BAD_SCHEDULE_SYNTAX, f"schedule.{day}",
                                    f"stop times are not strictly increasing: {times}"))
        return None, violations
    return entries, violations


@dataclass(frozen=True)
class _RawStop:
    """A day-string segment that tokenized far enough to consider repair."""

    time: int
    location: str | None
    x: int | None
    y: int | None
    direction: int | None
    valid: ScheduleEntry | None


def _tokenize_stop(segment: str) -> _RawStop | None:
    """Lenient read of one segment; None when even the time is unusable."""
    tokens = segment.split()
    if len(tokens) != 5 or not is_ascii_digits(tokens[0]):
        return None
    time = int(tokens[0])
    if not (MIN_SCHEDULE_TIME <= time <= MAX_SCHEDULE_TIME and time % 10 == 0):
        return None
    numbers = [token for token in tokens[2:] if is_ascii_digits(token.removeprefix("-"))]
    if len(numbers) != 3 or not tokens[1]:
        return _RawStop(time, None, None, None, None, None)
    x, y, direction = (int(value) for value in numbers)
    valid: ScheduleEntry | None = None
    if 0 <= direction <= 3 and x >= 0 and y >= 0:
        valid = ScheduleEntry(time=time, location=tokens[1], x=x, y=y, direction=direction)
    return _RawStop(time, tokens[1], x, y, direction, valid)


def repair_config(doc: object, whitelist: LocationWhitelist) -> ConfigBundle:
    """Conservatively repair a raw document or raise Unrepairable.

    Fixes applied, in order: per-stop drop (when at least 2 stops remain
    afterwards) or nearest same-location substitution for stops that are
    off-whitelist; Monday copied onto Wednesday and Friday; dialogue
    entries with bad keys dropped; dialogue map truncated to the first
    20. Everything else, including a Tuesday or Thursday that collapses
    onto Monday, is structural and raises.
    """
    if not isinstance(doc, dict):
        raise Unrepairable("document is not an object")
    schedule = doc.get("schedule")
    if not isinstance(schedule, dict):
        raise Unrepairable("missing schedule object")

    repaired_days: dict[str, str] = {}
    for day in DAY_KEYS:
        value = schedule.get(day)
        if not isinstance(value, str) or not value.strip():
            raise Unrepairable(f"schedule.{day} missing, cannot invent a day")
        repaired_days[day] = _repair_day(day, value, whitelist)

    repaired_days["Wed"] = repaired_days["Mon"]
    repaired_days["Fri"] = repaired_days["Mon"]
    for day in DISTINCT_DAYS:
        if repaired_days[day] == repaired_days["Mon"]:
            raise Unrepairable(f"schedule.{day} equals Monday; cannot invent a different day")

    dialogues = doc.get("dialogues")
    if not isinstance(dialogues, dict):
        raise Unrepairable("missing dialogues object")
    kept: dict[str, str] = {}
    for key, line in dialogues.items():
        if not isinstance(line, str) or not line.strip():
            continue
        try:
            parse_dialogue_key(key)
        except BadKeyError:
            continue
        kept[key] = line
        if len(kept) == MAX_DIALOGUES:
            break
    if len(kept) < MIN_DIALOGUES:
        raise Unrepairable(f"only {len(kept)} usable dialogue lines, need at least {MIN_DIALOGUES}")

    gifts = doc.get("giftDialogues")
    if not isinstance(gifts, dict):
        raise Unrepairable("missing giftDialogues object")
    for category in GIFT_CATEGORIES:
        value = gifts.get(category)
        if not isinstance(value, str) or not value.strip():
            raise Unrepairable(f"gift reaction {category} missing, cannot invent one")

    repaired = {
        "schedule": repaired_days,
        "dialogues": kept,
        "giftDialogues": {category: gifts[category] for category in GIFT_CATEGORIES},
    }
    result = validate_config(repaired, whitelist)
    if isinstance(result, ViolationReport):
        raise Unrepairable(f"residual violations after repair: {result.describe()}")
    return result


def _repair_day(day: str, text: str, whitelist: LocationWhitelist) -> str:
    segments = [segment for segment in text.split("/")]
    stops = [_tokenize_stop(segment) for segment in segments]
    if any(stop is None for stop in stops):
        raise Unrepairable(f"schedule.{day} has segments that do not tokenize; resend required")
    entries: list[ScheduleEntry] = []
    remaining = len(stops)
    for stop in stops:
        assert stop is not None
        if stop.valid is not None and whitelist.allows(stop.valid):
            entries.append(stop.valid)
            continue
        if remaining - 1 >= 2:
            remaining -= 1
            continue  # drop the bad stop, enough others remain
        if stop.location is None or stop.x is None or stop.y is None:
            raise Unrepairable(f"schedule.{day}: bad stop has no usable location to substitute")
        nearest = whitelist.nearest(stop.location, stop.x, stop.y)
        if nearest is None:
            raise Unrepairable(f"schedule.{day}: no whitelisted stop in {stop.location!r} to substitute")
        entries.append(ScheduleEntry(time=stop.time, location=nearest.location,
                                     x=nearest.x, y=nearest.y, direction=nearest.direction))
    times = [entry.time for entry in entries]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise Unrepairable(f"schedule.{day} times are not strictly increasing after repair")
    if not entries:
        raise Unrepairable(f"schedule.{day} has no usable stops")
    return serialize_day_schedule(tuple(entries))


def generate_config(expansion: CharacterExpansion, whitelist: LocationWhitelist,
                    gateway: Gateway) -> ConfigBundle:
    """Run the stage-three prompt until a clean or cleanly repaired bundle emerges."""
    request = prompts.config_request(wire.expansion_doc(expansion))

    def handle(doc: object) -> ConfigBundle:
        result = validate_config(doc, whitelist)
        if isinstance(result, ConfigBundle):
            return result
        log.info("config reply has %d violations, attempting repair", len(result.violations))
        try:
            return repair_config(doc, whitelist)
        except Unrepairable as err:
            raise RejectedOutput(f"{err}; violations: {result.describe()[:500]}") from err

    try:
        return attempt_loop(request, gateway.chat, handle)
    except ExhaustedRetries as err:
        raise StageFailure(STAGE_NAME, err) from err


def lint_config(bundle: ConfigBundle, whitelist: LocationWhitelist) -> list[str]:
    """Warnings that never block: location dialogue keys pointing nowhere useful."""
    visited = {(entry.location, entry.x, entry.y)
               for _, entries in bundle.schedule.items() for entry in entries}
    warnings = []
    for key in bundle.dialogues.entries:
        if not isinstance(key, LocationKey):
            continue
        tile = (key.location, key.x, key.y)
        if tile in visited:
            continue
        if whitelist.allows_tile(*tile):
            warnings.append(f"dialogue key {key.location}_{key.x}_{key.y} is never visited by the schedule")
        else:
            warnings.append(f"dialogue key {key.location}_{key.x}_{key.y} is not a whitelisted tile "
                            "and is never visited by the schedule")
    return warnings
