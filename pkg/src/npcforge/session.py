"""Wizard sessions: state machine, concurrency guards, snapshot store.

States only move forward through Describe, Highlights, Expansion,
Generated via stage runs, and backward via explicit jumps that clear
later-stage artifacts (recording the jump). Pinned card slots survive
regeneration by never being regenerated in the first place.

The snapshot store is one JSON file written atomically (temp file, then
rename), so a crash mid-write always leaves the previous snapshot
intact.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable

from . import wire
from .configgen import ConfigBundle, ViolationReport, bundle_doc, validate_config
from .errors import (
    BadSlot,
    CorruptStore,
    ForgeError,
    PinnedSlot,
    UnknownSession,
    WrongDirection,
    WrongStage,
)
from .expansion import apply_trait_edit, expand_highlight
from .gateway import Gateway
from .gifts import ItemCatalog
from .grammar import LocationWhitelist
from .highlights import generate_highlights, regenerate_highlight
from .model import (
    CharacterDescription,
    CharacterExpansion,
    GiftPreferences,
    Highlight,
    ModPack,
    validate_description,
)
from .pipeline import finish_expansion

log = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1
DEFAULT_TTL_SECONDS = 7 * 24 * 3600

SLOT_COUNT = 3


class Stage(str, Enum):
    DESCRIBE = "Describe"
    HIGHLIGHTS = "Highlights"
    EXPANSION = "Expansion"
    GENERATED = "Generated"


STAGE_ORDER = (Stage.DESCRIBE, Stage.HIGHLIGHTS, Stage.EXPANSION, Stage.GENERATED)


@dataclass(frozen=True)
class SessionState:
    """Immutable snapshot of one wizard session."""

    id: str
    stage: Stage
    description: CharacterDescription
    highlights: tuple[Highlight, ...] | None = None
    pinned: frozenset[int] = frozenset()
    selected: int | None = None
    expansion: CharacterExpansion | None = None
    bundle: ConfigBundle | None = None
    preferences: GiftPreferences | None = None
    pack: ModPack | None = None
    notices: tuple[str, ...] = ()
    history: tuple[dict, ...] = ()
    created_at: float = 0.0
    updated_at: float = 0.0


def check_slot(slot: int) -> int:
    if not isinstance(slot, int) or isinstance(slot, bool) or not 0 <= slot < SLOT_COUNT:
        raise BadSlot(f"slot must be 0..{SLOT_COUNT - 1}, got {slot!r}")
    return slot


class SessionManager:
    """All live sessions plus their persistence.

    Thread safety: a global lock guards the session table, one lock per
    session serializes mutations. States themselves are immutable, so
    reads never need coordination beyond the table lock.
    """

    def __init__(self, gateway: Gateway, whitelist: LocationWhitelist, catalog: ItemCatalog,
                 store_path: Path | None = None, ttl_seconds: float = DEFAULT_TTL_SECONDS,
                 author: str = "npcforge", version: str = "1.0.0",
                 clock: Callable[[], float] = time.time,
                 id_factory: Callable[[], str] = lambda: uuid.uuid4().hex[:16]) -> None:
        self.gateway = gateway
        self.whitelist = whitelist
        self.catalog = catalog
        self.store_path = Path(store_path) if store_path is not None else None
        self.ttl_seconds = ttl_seconds
        self.author = author
        self.version = version
        self.clock = clock
        self.id_factory = id_factory
        self._sessions: dict[str, SessionState] = {}
        self._table_lock = threading.RLock()
        self._session_locks: dict[str, threading.Lock] = {}
        if self.store_path is not None and self.store_path.exists():
            self.restore(self.store_path)

    # --- reads ---

    def get(self, session_id: str) -> SessionState:
        with self._table_lock:
            state = self._sessions.get(session_id)
        if state is None:
            raise UnknownSession(f"no session {session_id!r}")
        return state

    def ids(self) -> tuple[str, ...]:
        with self._table_lock:
            return tuple(self._sessions)

    # --- lifecycle ---

    def begin(self, text: str) -> SessionState:
        """Validate the description and park the session at Describe.

        Nothing is stored when validation fails, so a too-short
        description leaves no trace.
        """
        description = validate_description(text)
        now = self.clock()
        state = SessionState(
            id=self.id_factory(),
            stage=Stage.DESCRIBE,
            description=description,
            created_at=now,
            updated_at=now,
        )
        with self._table_lock:
            self._sessions[state.id] = state
            self._session_locks[state.id] = threading.Lock()
        self._persist()
        return state

    def create(self, text: str) -> SessionState:
        """begin() plus the first stage run, in one synchronous call."""
        state = self.begin(text)
        return self.run_highlights(state.id)

    def run_highlights(self, session_id: str) -> SessionState:
        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.DESCRIBE:
                raise WrongStage("highlight generation", state.stage.value)
            cards = generate_highlights(state.description, self.gateway)
            return replace(state, stage=Stage.HIGHLIGHTS, highlights=cards,
                           pinned=frozenset(), selected=None)
        return self._update(session_id, work)

    def delete(self, session_id: str) -> None:
        with self._table_lock:
            if session_id not in self._sessions:
                raise UnknownSession(f"no session {session_id!r}")
            del self._sessions[session_id]
            self._session_locks.pop(session_id, None)
        self._persist()

    def prune_expired(self, now: float | None = None) -> tuple[str, ...]:
        """Drop sessions idle longer than the TTL; returns the dropped ids."""
        moment = self.clock() if now is None else now
        with self._table_lock:
            expired = tuple(sid for sid, state in self._sessions.items()
                            if state.updated_at + self.ttl_seconds < moment)
            for sid in expired:
                del self._sessions[sid]
                self._session_locks.pop(sid, None)
        if expired:
            log.info("pruned %d expired sessions", len(expired))
            self._persist()
        return expired

    # --- highlight page ---

    def pin(self, session_id: str, slot: int) -> SessionState:
        check_slot(slot)

        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.HIGHLIGHTS:
                raise WrongStage("pin", state.stage.value)
            return replace(state, pinned=state.pinned | {slot})
        return self._update(session_id, work)

    def unpin(self, session_id: str, slot: int) -> SessionState:
        check_slot(slot)

        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.HIGHLIGHTS:
                raise WrongStage("unpin", state.stage.value)
            return replace(state, pinned=state.pinned - {slot})
        return self._update(session_id, work)

    def regenerate(self, session_id: str, slot: int) -> SessionState:
        """Replace one unpinned card; the other two slots are untouched."""
        check_slot(slot)

        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.HIGHLIGHTS or state.highlights is None:
                raise WrongStage("regenerate", state.stage.value)
            if slot in state.pinned:
                raise PinnedSlot(f"slot {slot} is pinned")
            card = regenerate_highlight(state.description, self.gateway)
            cards = list(state.highlights)
            cards[slot] = card
            return replace(state, highlights=tuple(cards))
        return self._update(session_id, work)

    def select(self, session_id: str, slot: int) -> SessionState:
        """Choose a card and run the trait-sheet stage."""
        check_slot(slot)

        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.HIGHLIGHTS or state.highlights is None:
                raise WrongStage("select", state.stage.value)
            expansion = expand_highlight(state.highlights[slot], state.description, self.gateway)
            return replace(state, stage=Stage.EXPANSION, selected=slot, expansion=expansion)
        return self._update(session_id, work)

    # --- expansion page ---

    def edit(self, session_id: str, field_path: str, value: str) -> SessionState:
        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.EXPANSION or state.expansion is None:
                raise WrongStage("edit", state.stage.value)
            return replace(state, expansion=apply_trait_edit(state.expansion, field_path, value))
        return self._update(session_id, work)

    def finalize(self, session_id: str) -> SessionState:
        """Run stage three, gift matching and pack assembly."""
        def work(state: SessionState) -> SessionState:
            if state.stage is not Stage.EXPANSION or state.expansion is None:
                raise WrongStage("finalize", state.stage.value)
            taken = self._taken_unique_ids(exclude=session_id)
            bundle, preferences, pack, notices = finish_expansion(
                state.expansion, self.whitelist, self.catalog, self.gateway,
                author=self.author, version=self.version, taken_ids=taken)
            return replace(state, stage=Stage.GENERATED, bundle=bundle,
                           preferences=preferences, pack=pack, notices=notices)
        return self._update(session_id, work)

    # --- backward jumps ---

    def back(self, session_id: str, target: Stage) -> SessionState:
        def work(state: SessionState) -> SessionState:
            if STAGE_ORDER.index(target) >= STAGE_ORDER.index(state.stage):
                raise WrongDirection(f"cannot jump from {state.stage.value} to {target.value}")
            record = {"from": state.stage.value, "to": target.value, "at": self.clock()}
            updated = replace(state, stage=target, history=state.history + (record,),
                              bundle=None, preferences=None, pack=None, notices=())
            if STAGE_ORDER.index(target) < STAGE_ORDER.index(Stage.EXPANSION):
                updated = replace(updated, expansion=None, selected=None)
            if target is Stage.DESCRIBE:
                updated = replace(updated, highlights=None, pinned=frozenset())
            return updated
        return self._update(session_id, work)

    # --- internals ---

    def _taken_unique_ids(self, exclude: str) -> tuple[str, ...]:
        with self._table_lock:
            return tuple(
                str(state.pack.manifest["UniqueID"])
                for sid, state in self._sessions.items()
                if sid != exclude and state.pack is not None and "UniqueID" in state.pack.manifest)

    def _update(self, session_id: str, work: Callable[[SessionState], SessionState]) -> SessionState:
        with self._table_lock:
            lock = self._session_locks.get(session_id)
        if lock is None:
            raise UnknownSession(f"no session {session_id!r}")
        with lock:
            state = self.get(session_id)
            updated = replace(work(state), updated_at=self.clock())
            with self._table_lock:
                self._sessions[session_id] = updated
        self._persist()
        return updated

    # --- persistence ---

    def _persist(self) -> None:
        if self.store_path is not None:
            self.snapshot(self.store_path)

    def snapshot(self, path: Path) -> None:
        """Write all sessions to one JSON file, atomically."""
        with self._table_lock:
            docs = {sid: session_doc(state) for sid, state in self._sessions.items()}
        payload = {"version": SNAPSHOT_VERSION, "saved_at": self.clock(), "sessions": docs}
        atomic_write_json(Path(path), payload)

    def restore(self, path: Path) -> None:
        """Replace the session table with the snapshot's content."""
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise CorruptStore(f"cannot read snapshot {path}: {err}") from err
        if not isinstance(payload, dict) or payload.get("version") != SNAPSHOT_VERSION:
            version = payload.get("version") if isinstance(payload, dict) else None
            raise CorruptStore(f"snapshot {path} has unsupported version {version!r}")
        sessions = payload.get("sessions")
        if not isinstance(sessions, dict):
            raise CorruptStore(f"snapshot {path} has no session table")
        restored: dict[str, SessionState] = {}
        for sid, doc in sessions.items():
            try:
                restored[sid] = session_from_doc(doc, self.whitelist)
            except (ForgeError, KeyError, TypeError, ValueError) as err:
                raise CorruptStore(f"snapshot {path}, session {sid}: {err}") from err
        with self._table_lock:
            self._sessions = restored
            self._session_locks = {sid: threading.Lock() for sid in restored}
        log.info("restored %d sessions from %s", len(restored), path)


def atomic_write_json(path: Path, payload: dict) -> None:
    """Temp-file-then-rename write; a crash never clobbers the old file."""
    data = json.dumps(payload, ensure_ascii=False, indent=2).encode("utf-8")
    temp = path.with_name(path.name + ".tmp")
    with open(temp, "wb") as handle:
        handle.write(data)
        handle.flush()
        os.fsync(handle.fileno())
    os.replace(temp, path)


# --- session serialization ---


def session_doc(state: SessionState) -> dict:
    return {
        "id": state.id,
        "stage": state.stage.value,
        "description": state.description.text,
        "highlights": None if state.highlights is None else [wire.highlight_doc(c) for c in state.highlights],
        "pinned": sorted(state.pinned),
        "selected": state.selected,
        "expansion": None if state.expansion is None else wire.expansion_doc(state.expansion),
        "bundle": None if state.bundle is None else bundle_doc(state.bundle),
        "preferences": None if state.preferences is None else {
            "loves": list(state.preferences.loves),
            "likes": list(state.preferences.likes),
            "dislikes": list(state.preferences.dislikes),
            "hates": list(state.preferences.hates),
        },
        "pack": None if state.pack is None else {
            "manifest": dict(state.pack.manifest),
            "content": dict(state.pack.content),
            "dialogues": dict(state.pack.dialogues),
            "schedules": dict(state.pack.schedules),
            "assets": {name: base64.b64encode(data).decode("ascii")
                       for name, data in sorted(state.pack.assets.items())},
        },
        "notices": list(state.notices),
        "history": list(state.history),
        "created_at": state.created_at,
        "updated_at": state.updated_at,
    }


def session_from_doc(doc: dict, whitelist: LocationWhitelist) -> SessionState:
    description = CharacterDescription(doc["description"])
    highlights = None
    if doc.get("highlights") is not None:
        cards = [wire.parse_highlight(card, description.text) for card in doc["highlights"]]
        highlights = tuple(cards)
    expansion = None
    if doc.get("expansion") is not None:
        expansion = wire.expansion_from_doc(doc["expansion"])
    bundle = None
    if doc.get("bundle") is not None:
        result = validate_config(doc["bundle"], whitelist)
        if isinstance(result, ViolationReport):
            raise CorruptStore(f"stored bundle fails validation: {result.describe()}")
        bundle = result
    preferences = None
    if doc.get("preferences") is not None:
        raw = doc["preferences"]
        preferences = GiftPreferences(
            loves=tuple(raw.get("loves", ())),
            likes=tuple(raw.get("likes", ())),
            dislikes=tuple(raw.get("dislikes", ())),
            hates=tuple(raw.get("hates", ())),
        )
    pack = None
    if doc.get("pack") is not None:
        raw = doc["pack"]
        pack = ModPack(
            manifest=raw["manifest"],
            content=raw["content"],
            dialogues=raw["dialogues"],
            schedules=raw["schedules"],
            assets={name: base64.b64decode(data) for name, data in raw["assets"].items()},
        )
    return SessionState(
        id=doc["id"],
        stage=Stage(doc["stage"]),
        description=description,
        highlights=highlights,
        pinned=frozenset(doc.get("pinned", ())),
        selected=doc.get("selected"),
        expansion=expansion,
        bundle=bundle,
        preferences=preferences,
        pack=pack,
        notices=tuple(doc.get("notices", ())),
        history=tuple(doc.get("history", ())),
        created_at=doc.get("created_at", 0.0),
        updated_at=doc.get("updated_at", 0.0),
    )
