"""Domain value objects: construction invariants and parsing."""

import pytest
from hypothesis import given, strategies as st

from npcforge.errors import EnumOutOfRange, InvariantViolation, TooShort
from npcforge.model import (
    DAY_KEYS,
    MIN_DESCRIPTION_CHARS,
    Birthday,
    DailySchedule,
    DayOfMonthKey,
    DayOfWeekKey,
    GiftPreferences,
    Highlight,
    LocationKey,
    Manner,
    ModPack,
    Optimism,
    ScheduleEntry,
    Season,
    SocialAnxiety,
    lint_highlight,
    validate_description,
)

from helpers import entry


class TestDescription:
    def test_minimum_is_inclusive(self):
        text = "x" * MIN_DESCRIPTION_CHARS
        assert validate_description(text).text == text

    def test_one_below_minimum_raises(self):
        with pytest.raises(TooShort) as exc:
            validate_description("x" * (MIN_DESCRIPTION_CHARS - 1))
        assert exc.value.actual_length == MIN_DESCRIPTION_CHARS - 1
        assert exc.value.minimum == MIN_DESCRIPTION_CHARS

    def test_length_is_measured_after_trimming(self):
        padded = "  " + "x" * (MIN_DESCRIPTION_CHARS - 1) + "  \n"
        with pytest.raises(TooShort):
            validate_description(padded)

    def test_trims_surrounding_whitespace(self):
        text = "x" * MIN_DESCRIPTION_CHARS
        assert validate_description(f"  {text}\n").text == text

    @given(st.text(max_size=300))
    def test_never_accepts_below_minimum(self, text):
        try:
            result = validate_description(text)
        except TooShort:
            assert len(text.strip()) < MIN_DESCRIPTION_CHARS
        else:
            assert len(result.text) >= MIN_DESCRIPTION_CHARS


class TestBirthday:
    @pytest.mark.parametrize("raw, season, day", [
        ("Fall 15", Season.FALL, 15),
        ("Fall, 15", Season.FALL, 15),
        ("spring 1", Season.SPRING, 1),
        ("  Winter  28 ", Season.WINTER, 28),
        ("Summer 05", Season.SUMMER, 5),
    ])
    def test_parse_accepted_spellings(self, raw, season, day):
        parsed = Birthday.parse(raw)
        assert (parsed.season, parsed.day) == (season, day)

    @pytest.mark.parametrize("raw", ["Fall 0", "Fall 29", "Smarch 3", "Fall", "15 Fall", "Fall fifteen"])
    def test_parse_rejections(self, raw):
        with pytest.raises(InvariantViolation):
            Birthday.parse(raw)

    def test_format_is_canonical(self):
        assert Birthday.parse("Fall, 05").format() == "Fall 5"

    @given(st.sampled_from(list(Season)), st.integers(min_value=1, max_value=28))
    def test_roundtrip(self, season, day):
        birthday = Birthday(season, day)
        assert Birthday.parse(birthday.format()) == birthday


class TestTraitEnums:
    @pytest.mark.parametrize("enum, values", [
        (Manner, ("Polite", "Rude", "Neutral")),
        (SocialAnxiety, ("Outgoing", "Shy", "Neutral")),
        (Optimism, ("Positive", "Negative", "Neutral")),
    ])
    def test_members_and_case_insensitive_parse(self, enum, values):
        assert tuple(member.value for member in enum) == values
        for value in values:
            assert str(enum.parse(value.upper())) == value

    def test_out_of_range(self):
        with pytest.raises(EnumOutOfRange) as exc:
            Manner.parse("Grumpy")
        assert exc.value.value == "Grumpy"


def make_card(**overrides) -> Highlight:
    fields = dict(
        image="portrait.png", name="Larry", age=54, birthday=Birthday(Season.SUMMER, 19),
        gender="Male", title="The Tidewatcher",
        bullets=("Fishes at dawn", "Collects shells", "Mentors anglers", "Distrusts Joja"),
        quote="The sea tells you everything.", description="A weathered fisherman.")
    fields.update(overrides)
    return Highlight(**fields)


class TestHighlight:
    def test_requires_exactly_four_bullets(self):
        with pytest.raises(InvariantViolation):
            make_card(bullets=("a", "b", "c"))
        with pytest.raises(InvariantViolation):
            make_card(bullets=("a", "b", "c", "d", "e"))

    def test_age_must_be_positive_int(self):
        with pytest.raises(InvariantViolation):
            make_card(age=0)
        with pytest.raises(InvariantViolation):
            make_card(age=True)

    def test_lint_flags_long_bullets_without_raising(self):
        card = make_card(bullets=("short", "also short", "fine", "this bullet runs far past the six word budget"))
        warnings = lint_highlight(card)
        assert len(warnings) == 1 and "bullet 3" in warnings[0]
        assert lint_highlight(make_card()) == []


class TestScheduleEntry:
    def test_time_bounds_and_granularity(self):
        assert entry(600).time == 600
        assert entry(2600).time == 2600
        for bad in (590, 2610, 955):
            with pytest.raises(InvariantViolation):
                entry(bad)

    def test_direction_bounds(self):
        for direction in range(4):
            assert entry(900, direction=direction).direction == direction
        with pytest.raises(InvariantViolation):
            entry(900, direction=4)
        with pytest.raises(InvariantViolation):
            entry(900, direction=-1)


class TestDailySchedule:
    def week(self, **overrides):
        days = {day: (entry(900), entry(1300)) for day in DAY_KEYS}
        days.update(overrides)
        return days

    def test_requires_all_seven_days(self):
        days = self.week()
        del days["Thu"]
        with pytest.raises(InvariantViolation, match="missing day"):
            DailySchedule(days)

    def test_rejects_unknown_day_keys(self):
        with pytest.raises(InvariantViolation, match="unknown"):
            DailySchedule(self.week(Monday=(entry(900),)))

    def test_times_strictly_increasing(self):
        with pytest.raises(InvariantViolation, match="strictly increasing"):
            DailySchedule(self.week(Mon=(entry(900), entry(900))))
        with pytest.raises(InvariantViolation, match="strictly increasing"):
            DailySchedule(self.week(Mon=(entry(1300), entry(900))))

    def test_items_iterates_in_week_order(self):
        schedule = DailySchedule(self.week())
        assert [day for day, _ in schedule.items()] == list(DAY_KEYS)


class TestDialogueKeys:
    def test_day_of_month_bounds(self):
        assert DayOfMonthKey(1).day == 1
        assert DayOfMonthKey(10).day == 10
        for bad in (0, 11):
            with pytest.raises(InvariantViolation):
                DayOfMonthKey(bad)

    def test_day_of_week_closed_set(self):
        with pytest.raises(InvariantViolation):
            DayOfWeekKey("Monday")

    def test_location_key_needs_letter_start_and_non_negative_coords(self):
        assert LocationKey("Mountain", 76, 14).x == 76
        with pytest.raises(InvariantViolation):
            LocationKey("3Mountain", 1, 1)
        with pytest.raises(InvariantViolation):
            LocationKey("Mountain", -1, 1)


class TestGiftPreferences:
    def test_disjointness_enforced(self):
        with pytest.raises(InvariantViolation, match="share"):
            GiftPreferences(loves=("Beer",), hates=("Beer",))

    def test_duplicates_within_list_rejected(self):
        with pytest.raises(InvariantViolation, match="duplicate"):
            GiftPreferences(likes=("Beer", "Beer"))

    def test_empty_is_fine(self):
        assert GiftPreferences().loves == ()


class TestModPack:
    def test_needs_two_assets(self):
        with pytest.raises(InvariantViolation):
            ModPack(manifest={}, content={}, dialogues={}, schedules={}, assets={"a.png": b"x"})
