"""HTTP wizard service.

Thin JSON layer over the session manager. Stage runs (highlight
generation, card regeneration, selection, finalize) can take many
upstream round trips, so they execute on an injected executor while the
client polls the status endpoint; everything else answers inline.

Error contract: invalid input maps to 400, unknown sessions to 404,
operations that collide with the session's current state (wrong stage,
pinned slot, busy, backward-jump misuse) to 409, upstream generation
failures to 502.
"""

from __future__ import annotations

import concurrent.futures
import logging
import threading
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .configgen import bundle_doc
from .emitter import archive_pack, slugify
from .errors import (
    BadSlot,
    BadVersion,
    DanglingReference,
    EnumOutOfRange,
    ExhaustedRetries,
    FixtureMiss,
    ForgeError,
    InvariantViolation,
    PinnedSlot,
    ProviderConnectionError,
    ProviderRefusal,
    SessionBusy,
    StageFailure,
    TooShort,
    UnknownField,
    UnknownSession,
    Unrepairable,
    WrongDirection,
    WrongStage,
)
from .session import SessionManager, SessionState, Stage, check_slot
from .wire import expansion_doc, highlight_doc

log = logging.getLogger(__name__)

_STATUS_BY_ERROR: tuple[tuple[type[ForgeError], int], ...] = (
    (TooShort, 400),
    (BadSlot, 400),
    (UnknownField, 400),
    (EnumOutOfRange, 400),
    (InvariantViolation, 400),
    (BadVersion, 400),
    (UnknownSession, 404),
    (WrongStage, 409),
    (PinnedSlot, 409),
    (WrongDirection, 409),
    (SessionBusy, 409),
    (StageFailure, 502),
    (ExhaustedRetries, 502),
    (Unrepairable, 502),
    (ProviderRefusal, 502),
    (ProviderConnectionError, 502),
    (FixtureMiss, 502),
    (DanglingReference, 500),
)


def _status_for(err: ForgeError) -> int:
    for kind, status in _STATUS_BY_ERROR:
        if isinstance(err, kind):
            return status
    return 500


class InlineExecutor:
    """Runs submitted work immediately; makes the service synchronous."""

    def submit(self, fn: Callable, *args, **kwargs):
        future: concurrent.futures.Future = concurrent.futures.Future()
        try:
            future.set_result(fn(*args, **kwargs))
        except BaseException as err:
            future.set_exception(err)
        return future

    def shutdown(self, wait: bool = True) -> None:
        pass


class CreateSessionBody(BaseModel):
    description: str


class EditBody(BaseModel):
    field_path: str = Field(alias="fieldPath")
    value: str


class BackBody(BaseModel):
    target_stage: str = Field(alias="targetStage")


def session_view(state: SessionState, busy: bool, last_error: str | None) -> dict:
    """Client-facing session document; pack bytes stay server-side."""
    return {
        "id": state.id,
        "stage": state.stage.value,
        "busy": busy,
        "lastError": last_error,
        "description": state.description.text,
        "highlights": None if state.highlights is None
        else [highlight_doc(card) for card in state.highlights],
        "pinned": sorted(state.pinned),
        "selected": state.selected,
        "expansion": None if state.expansion is None else expansion_doc(state.expansion),
        "bundle": None if state.bundle is None else bundle_doc(state.bundle),
        "preferences": None if state.preferences is None else {
            "loves": list(state.preferences.loves),
            "likes": list(state.preferences.likes),
            "dislikes": list(state.preferences.dislikes),
            "hates": list(state.preferences.hates),
        },
        "notices": list(state.notices),
        "pack": None if state.pack is None else {
            "files": sorted(["manifest.json", "content.json", "dialogues.json",
                             "schedules.json", *state.pack.assets]),
            "uniqueId": state.pack.manifest.get("UniqueID"),
        },
        "history": list(state.history),
    }


def create_app(manager: SessionManager, executor=None, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="npcforge", docs_url=None, redoc_url=None)
    pool = executor if executor is not None else concurrent.futures.ThreadPoolExecutor(max_workers=4)

    busy: dict[str, bool] = {}
    last_error: dict[str, str | None] = {}
    track_lock = threading.Lock()

    @app.exception_handler(ForgeError)
    async def forge_error_handler(request: Request, err: ForgeError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(err),
            content={"error": type(err).__name__, "message": str(err)},
        )

    def view(session_id: str) -> dict:
        state = manager.get(session_id)
        with track_lock:
            return session_view(state, busy.get(session_id, False), last_error.get(session_id))

    def claim(session_id: str) -> None:
        # Reject concurrent stage runs instead of queueing them.
        manager.get(session_id)
        with track_lock:
            if busy.get(session_id):
                raise SessionBusy(f"session {session_id} is already generating")
            busy[session_id] = True
            last_error[session_id] = None

    def launch(session_id: str, work: Callable[[], SessionState]) -> None:
        def run() -> None:
            try:
                work()
            except ForgeError as err:
                log.warning("session %s stage run failed: %s", session_id, err)
                with track_lock:
                    last_error[session_id] = f"{type(err).__name__}: {err}"
            except Exception:
                log.exception("session %s stage run crashed", session_id)
                with track_lock:
                    last_error[session_id] = "InternalError: unexpected failure"
            finally:
                with track_lock:
                    busy[session_id] = False
        pool.submit(run)

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        state = manager.begin(body.description)
        claim(state.id)
        launch(state.id, lambda: manager.run_highlights(state.id))
        return view(state.id)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return view(session_id)

    @app.get("/api/sessions/{session_id}/status")
    def get_status(session_id: str) -> dict:
        state = manager.get(session_id)
        with track_lock:
            return {
                "stage": state.stage.value,
                "busy": busy.get(session_id, False),
                "lastError": last_error.get(session_id),
            }

    @app.post("/api/sessions/{session_id}/highlights/{slot}/pin")
    def pin_slot(session_id: str, slot: int) -> dict:
        manager.pin(session_id, slot)
        return view(session_id)

    @app.post("/api/sessions/{session_id}/highlights/{slot}/unpin")
    def unpin_slot(session_id: str, slot: int) -> dict:
        manager.unpin(session_id, slot)
        return view(session_id)

    @app.post("/api/sessions/{session_id}/highlights/{slot}/regenerate")
    def regenerate_slot(session_id: str, slot: int) -> dict:
        check_slot(slot)
        state = manager.get(session_id)
        if state.stage is not Stage.HIGHLIGHTS:
            raise WrongStage("regenerate", state.stage.value)
        if slot in state.pinned:
            raise PinnedSlot(f"slot {slot} is pinned")
        claim(session_id)
        launch(session_id, lambda: manager.regenerate(session_id, slot))
        return view(session_id)

    @app.post("/api/sessions/{session_id}/highlights/{slot}/select")
    def select_slot(session_id: str, slot: int) -> dict:
        check_slot(slot)
        state = manager.get(session_id)
        if state.stage is not Stage.HIGHLIGHTS:
            raise WrongStage("select", state.stage.value)
        claim(session_id)
        launch(session_id, lambda: manager.select(session_id, slot))
        return view(session_id)

    @app.patch("/api/sessions/{session_id}/expansion")
    def edit_expansion(session_id: str, body: EditBody) -> dict:
        manager.edit(session_id, body.field_path, body.value)
        return view(session_id)

    @app.post("/api/sessions/{session_id}/finalize")
    def finalize_session(session_id: str) -> dict:
        state = manager.get(session_id)
        if state.stage is not Stage.EXPANSION:
            raise WrongStage("finalize", state.stage.value)
        claim(session_id)
        launch(session_id, lambda: manager.finalize(session_id))
        return view(session_id)

    @app.post("/api/sessions/{session_id}/back")
    def go_back(session_id: str, body: BackBody) -> dict:
        try:
            target = Stage(body.target_stage)
        except ValueError:
            return JSONResponse(
                status_code=400,
                content={"error": "BadStage",
                         "message": f"unknown stage {body.target_stage!r}"})
        with track_lock:
            if busy.get(session_id):
                raise SessionBusy(f"session {session_id} is already generating")
        manager.back(session_id, target)
        return view(session_id)

    @app.get("/api/sessions/{session_id}/download")
    def download_pack(session_id: str) -> Response:
        state = manager.get(session_id)
        if state.stage is not Stage.GENERATED or state.pack is None:
            raise WrongStage("download", state.stage.value)
        payload = archive_pack(state.pack)
        name = slugify(str(state.pack.manifest.get("Name", "character-mod")))
        return Response(
            content=payload,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{name}.zip"'},
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="frontend")

    return app
