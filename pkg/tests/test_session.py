"""Wizard session state machine, TTL pruning, snapshot persistence."""

import itertools
import json
import threading

import pytest

from npcforge.errors import (
    BadSlot,
    CorruptStore,
    PinnedSlot,
    TooShort,
    UnknownSession,
    WrongDirection,
    WrongStage,
)
from npcforge.model import Manner
from npcforge.session import (
    SessionManager,
    Stage,
    atomic_write_json,
    check_slot,
    session_doc,
)

from canned import CHARACTERS, golden_replies
from helpers import scripted_gateway

LARRY = CHARACTERS["larry"]


class Clock:
    def __init__(self, now=0.0):
        self.now = now

    def __call__(self):
        return self.now


def make_manager(whitelist, catalog, **kwargs):
    counter = itertools.count(1)
    kwargs.setdefault("id_factory", lambda: f"session{next(counter)}")
    gateway = kwargs.pop("gateway", scripted_gateway(golden_replies("larry")))
    return SessionManager(gateway, whitelist, catalog, **kwargs)


class TestCheckSlot:
    @pytest.mark.parametrize("slot", [0, 1, 2])
    def test_valid(self, slot):
        assert check_slot(slot) == slot

    @pytest.mark.parametrize("slot", [-1, 3, True, False, "1", 1.0, None])
    def test_invalid(self, slot):
        with pytest.raises(BadSlot):
            check_slot(slot)


class TestLifecycle:
    def test_short_description_leaves_no_trace(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        with pytest.raises(TooShort):
            manager.begin("too short")
        assert manager.ids() == ()

    def test_begin_parks_at_describe(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.begin(LARRY["description"])
        assert state.stage is Stage.DESCRIBE
        assert state.highlights is None
        assert manager.get(state.id) == state

    def test_create_runs_the_first_stage(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        assert state.stage is Stage.HIGHLIGHTS
        assert len(state.highlights) == 3
        assert state.pinned == frozenset()

    def test_highlights_cannot_run_twice(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        with pytest.raises(WrongStage):
            manager.run_highlights(state.id)

    def test_select_expands_the_chosen_card(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        chosen = state.highlights[1]
        state = manager.select(state.id, 1)
        assert state.stage is Stage.EXPANSION
        assert state.selected == 1
        assert state.expansion.name == chosen.name
        assert state.expansion.age == chosen.age

    def test_finalize_produces_a_pack(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        state = manager.select(state.id, 0)
        state = manager.finalize(state.id)
        assert state.stage is Stage.GENERATED
        assert state.pack.manifest["UniqueID"] == "npcforge.Larry"
        assert state.bundle is not None
        assert state.preferences.loves
        assert manager.get(state.id).pack is state.pack

    def test_finalize_requires_expansion_stage(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        with pytest.raises(WrongStage):
            manager.finalize(state.id)

    def test_unique_ids_never_collide_across_sessions(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        first = manager.create(LARRY["description"])
        manager.select(first.id, 0)
        first = manager.finalize(first.id)
        second = manager.create(LARRY["description"])
        manager.select(second.id, 0)
        second = manager.finalize(second.id)
        assert first.pack.manifest["UniqueID"] == "npcforge.Larry"
        assert second.pack.manifest["UniqueID"] == "npcforge.Larry2"

    def test_unknown_session(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        with pytest.raises(UnknownSession):
            manager.get("nope")
        with pytest.raises(UnknownSession):
            manager.pin("nope", 0)
        with pytest.raises(UnknownSession):
            manager.delete("nope")

    def test_delete_removes_the_session(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        manager.delete(state.id)
        assert manager.ids() == ()

    def test_timestamps_come_from_the_injected_clock(self, whitelist, catalog):
        clock = Clock(100.0)
        manager = make_manager(whitelist, catalog, clock=clock)
        state = manager.begin(LARRY["description"])
        assert state.created_at == state.updated_at == 100.0
        clock.now = 160.0
        state = manager.run_highlights(state.id)
        assert state.created_at == 100.0
        assert state.updated_at == 160.0


class TestPinning:
    @pytest.fixture()
    def started(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        return manager, state.id

    def test_pin_and_unpin(self, started):
        manager, sid = started
        assert manager.pin(sid, 0).pinned == {0}
        assert manager.pin(sid, 2).pinned == {0, 2}
        assert manager.unpin(sid, 0).pinned == {2}

    def test_pin_requires_highlights_stage(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.begin(LARRY["description"])
        with pytest.raises(WrongStage):
            manager.pin(state.id, 0)

    def test_regenerate_replaces_exactly_one_slot(self, started):
        manager, sid = started
        before = manager.get(sid).highlights
        after = manager.regenerate(sid, 1).highlights
        assert after[0] == before[0]
        assert after[2] == before[2]
        assert after[1].age == before[0].age  # fresh batch's first card

    def test_regenerate_refuses_pinned_slots(self, started):
        manager, sid = started
        manager.pin(sid, 1)
        with pytest.raises(PinnedSlot):
            manager.regenerate(sid, 1)
        assert manager.get(sid).highlights is not None

    def test_pinned_cards_survive_other_regenerations(self, started):
        manager, sid = started
        manager.pin(sid, 0)
        pinned_card = manager.get(sid).highlights[0]
        manager.regenerate(sid, 1)
        manager.regenerate(sid, 2)
        assert manager.get(sid).highlights[0] == pinned_card
        assert manager.get(sid).pinned == {0}

    def test_bad_slots_rejected_before_any_work(self, started):
        manager, sid = started
        for method in (manager.pin, manager.unpin, manager.regenerate, manager.select):
            with pytest.raises(BadSlot):
                method(sid, 7)


class TestBack:
    @pytest.fixture()
    def generated(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog, clock=Clock(50.0))
        state = manager.create(LARRY["description"])
        manager.pin(state.id, 0)
        manager.select(state.id, 0)
        manager.finalize(state.id)
        return manager, state.id

    def test_back_to_expansion_clears_generated_artifacts(self, generated):
        manager, sid = generated
        state = manager.back(sid, Stage.EXPANSION)
        assert state.stage is Stage.EXPANSION
        assert state.bundle is None and state.pack is None
        assert state.preferences is None and state.notices == ()
        assert state.expansion is not None
        assert state.selected == 0

    def test_back_to_highlights_clears_the_expansion(self, generated):
        manager, sid = generated
        state = manager.back(sid, Stage.HIGHLIGHTS)
        assert state.expansion is None and state.selected is None
        assert len(state.highlights) == 3
        assert state.pinned == {0}  # pins only reset at Describe

    def test_back_to_describe_clears_everything(self, generated):
        manager, sid = generated
        state = manager.back(sid, Stage.DESCRIBE)
        assert state.highlights is None and state.pinned == frozenset()
        assert state.expansion is None and state.pack is None
        assert manager.run_highlights(sid).stage is Stage.HIGHLIGHTS

    def test_back_records_the_jump(self, generated):
        manager, sid = generated
        manager.back(sid, Stage.EXPANSION)
        state = manager.back(sid, Stage.HIGHLIGHTS)
        assert [record["from"] for record in state.history] == ["Generated", "Expansion"]
        assert [record["to"] for record in state.history] == ["Expansion", "Highlights"]
        assert all(record["at"] == 50.0 for record in state.history)

    def test_back_never_moves_forward_or_sideways(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        for target in (Stage.HIGHLIGHTS, Stage.EXPANSION, Stage.GENERATED):
            with pytest.raises(WrongDirection):
                manager.back(state.id, target)


class TestTtl:
    def test_idle_sessions_expire(self, whitelist, catalog):
        clock = Clock(0.0)
        manager = make_manager(whitelist, catalog, clock=clock, ttl_seconds=1000)
        old = manager.create(LARRY["description"])
        clock.now = 900.0
        fresh = manager.create(LARRY["description"])
        dropped = manager.prune_expired(now=1500.0)
        assert dropped == (old.id,)
        assert manager.ids() == (fresh.id,)
        with pytest.raises(UnknownSession):
            manager.get(old.id)

    def test_activity_refreshes_the_clock(self, whitelist, catalog):
        clock = Clock(0.0)
        manager = make_manager(whitelist, catalog, clock=clock, ttl_seconds=1000)
        state = manager.create(LARRY["description"])
        clock.now = 900.0
        manager.pin(state.id, 0)
        assert manager.prune_expired(now=1500.0) == ()
        assert manager.ids() == (state.id,)

    def test_nothing_expired_returns_empty(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog, clock=Clock(10.0), ttl_seconds=1000)
        manager.create(LARRY["description"])
        assert manager.prune_expired(now=100.0) == ()


class TestSnapshot:
    def full_run(self, whitelist, catalog, store):
        manager = make_manager(whitelist, catalog, store_path=store, clock=Clock(10.0))
        state = manager.create(LARRY["description"])
        manager.pin(state.id, 1)
        manager.select(state.id, 0)
        manager.edit(state.id, "personality.manners", "Rude")
        manager.back(state.id, Stage.HIGHLIGHTS)
        manager.select(state.id, 0)
        manager.edit(state.id, "personality.manners", "Rude")
        return manager, manager.finalize(state.id)

    def test_roundtrip_restores_identical_state(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        manager, state = self.full_run(whitelist, catalog, store)
        partial = manager.begin(LARRY["description"])
        reloaded = make_manager(whitelist, catalog, store_path=store)
        assert set(reloaded.ids()) == {state.id, partial.id}
        assert reloaded.get(state.id) == manager.get(state.id)
        assert reloaded.get(partial.id) == manager.get(partial.id)

    def test_edited_traits_survive_restore(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        _, state = self.full_run(whitelist, catalog, store)
        reloaded = make_manager(whitelist, catalog, store_path=store)
        restored = reloaded.get(state.id)
        assert restored.expansion.personality.manners is Manner.RUDE
        assert restored.pack.assets == dict(state.pack.assets)

    def test_restored_sessions_keep_working(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        _, state = self.full_run(whitelist, catalog, store)
        reloaded = make_manager(whitelist, catalog, store_path=store)
        back = reloaded.back(state.id, Stage.EXPANSION)
        assert back.stage is Stage.EXPANSION
        assert reloaded.finalize(state.id).pack is not None

    def test_session_doc_is_json_serializable(self, whitelist, catalog, tmp_path):
        _, state = self.full_run(whitelist, catalog, tmp_path / "sessions.json")
        json.dumps(session_doc(state))

    def test_no_temp_file_left_behind(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        self.full_run(whitelist, catalog, store)
        assert store.exists()
        assert not store.with_name(store.name + ".tmp").exists()

    def test_stray_temp_file_does_not_break_restore(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        _, state = self.full_run(whitelist, catalog, store)
        store.with_name(store.name + ".tmp").write_text("{ truncated", encoding="utf-8")
        reloaded = make_manager(whitelist, catalog, store_path=store)
        assert reloaded.get(state.id) == state

    def test_atomic_write_replaces_in_one_step(self, tmp_path):
        path = tmp_path / "data.json"
        atomic_write_json(path, {"value": 1})
        atomic_write_json(path, {"value": 2})
        assert json.loads(path.read_text(encoding="utf-8")) == {"value": 2}

    @pytest.mark.parametrize("payload", [
        "not json at all",
        json.dumps({"version": 99, "sessions": {}}),
        json.dumps({"version": 1}),
        json.dumps({"version": 1, "sessions": []}),
        json.dumps([1, 2, 3]),
    ])
    def test_corrupt_snapshots_are_rejected(self, whitelist, catalog, tmp_path, payload):
        store = tmp_path / "sessions.json"
        store.write_text(payload, encoding="utf-8")
        manager = make_manager(whitelist, catalog)
        with pytest.raises(CorruptStore):
            manager.restore(store)

    def test_tampered_bundle_is_rejected_on_restore(self, whitelist, catalog, tmp_path):
        store = tmp_path / "sessions.json"
        _, state = self.full_run(whitelist, catalog, store)
        payload = json.loads(store.read_text(encoding="utf-8"))
        payload["sessions"][state.id]["bundle"]["schedule"]["Tue"] = (
            payload["sessions"][state.id]["bundle"]["schedule"]["Mon"])
        store.write_text(json.dumps(payload), encoding="utf-8")
        manager = make_manager(whitelist, catalog)
        with pytest.raises(CorruptStore, match="fails validation"):
            manager.restore(store)

    def test_missing_snapshot_file_is_a_corrupt_store(self, whitelist, catalog, tmp_path):
        manager = make_manager(whitelist, catalog)
        with pytest.raises(CorruptStore):
            manager.restore(tmp_path / "absent.json")


class TestConcurrency:
    def test_parallel_pins_both_land(self, whitelist, catalog):
        manager = make_manager(whitelist, catalog)
        state = manager.create(LARRY["description"])
        threads = [threading.Thread(target=manager.pin, args=(state.id, slot)) for slot in (0, 1, 2)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert manager.get(state.id).pinned == {0, 1, 2}
