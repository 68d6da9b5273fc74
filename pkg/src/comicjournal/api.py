"""HTTP service: session lifecycle, registries, journals, stats, and a
server-sent-events channel that streams every system action.

Concurrency model: one asyncio.Lock per session serializes input
processing; the blocking engine call runs in a worker thread so the
event loop keeps serving other sessions.  The in-memory runtime holds
the live session plus its ordered action log; both are persisted after
every successful step, so a restarted server can rehydrate any session
from disk on first touch.

Status codes: 201 resource created, 404 unknown id, 409 input illegal
in the current phase (response lists what would be accepted), 422
malformed body, 502 language-model failure (session state unchanged,
an error notice is appended to the event stream instead).
"""

from __future__ import annotations

import asyncio
from dataclasses import dataclass, field
from datetime import date
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, ConfigDict, Field

from . import analytics, svg
from .config import AppConfig, build_gateway
from .engine import JournalEngine
from .errors import (
    CorruptRecordError,
    DuplicateIdError,
    IllegalStateError,
    NotFoundError,
    ProtocolError,
)
from .gateway import StageError
from .models import (
    SLOT_ORDER,
    AdolescentProfile,
    ErrorNoticeAction,
    PeerProfile,
    PersonCategory,
    PersonEntry,
    Phase,
    PlaceEntry,
    Session,
    SystemAction,
    UserInput,
    canonical_json,
    empty_scene,
    to_jsonable,
    validate_profile,
)
from .storage import FileStore

_END_SENTINEL = None


@dataclass
class SessionRuntime:
    session: Session
    actions: list[SystemAction] = field(default_factory=list)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    queues: set[asyncio.Queue] = field(default_factory=set)
    idempotency: dict[str, dict[str, Any]] = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        return self.session.phase is Phase.FINALIZED


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    profile_id: str
    peer_id: str


class InputRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input: UserInput
    idempotency_key: str | None = None


class ProfileCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | None = None
    name: str
    age: int
    gender: str = ""
    interests: list[str] = Field(default_factory=list)


class PeerCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | None = None
    name: str
    voice_id: str | None = None
    avatar_ref: str | None = None


class PlaceCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | None = None
    profile_id: str
    label: str
    category: str = ""


class PersonCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | None = None
    profile_id: str
    label: str
    category: PersonCategory = PersonCategory.OTHER


def _dump_actions(actions: list[SystemAction]) -> list[Any]:
    return [to_jsonable(action) for action in actions]


def create_app(
    config: AppConfig | None = None,
    *,
    engine: JournalEngine | None = None,
    store: FileStore | None = None,
) -> FastAPI:
    """Build the service.  Tests may inject a prepared engine and store;
    otherwise both are assembled from the config."""
    if store is None:
        if config is None:
            raise ValueError("create_app needs a config or an explicit store")
        store = FileStore(config.data_dir)
    if engine is None:
        if config is None:
            raise ValueError("create_app needs a config or an explicit engine")
        engine = JournalEngine(
            build_gateway(config),
            store,
            locale=config.locale,
            journal_sink=store.save_journal,
            tts_enabled=config.tts_enabled,
        )

    app = FastAPI(title="comicjournal", version="0.1.0")
    app.state.engine = engine
    app.state.store = store
    app.state.runtimes = {}

    # -- shared helpers -----------------------------------------------------

    def get_runtime(session_id: str) -> SessionRuntime:
        runtime = app.state.runtimes.get(session_id)
        if runtime is not None:
            return runtime
        try:
            session = store.load_session(session_id)
        except NotFoundError:
            raise NotFoundError(f"unknown session {session_id!r}") from None
        runtime = SessionRuntime(session=session, actions=store.load_actions(session_id))
        app.state.runtimes[session_id] = runtime
        return runtime

    def broadcast(runtime: SessionRuntime, actions: list[SystemAction]) -> None:
        start = len(runtime.actions)
        runtime.actions.extend(actions)
        for offset, action in enumerate(actions):
            for queue in runtime.queues:
                queue.put_nowait((start + offset, action))
        if runtime.closed:
            for queue in runtime.queues:
                queue.put_nowait(_END_SENTINEL)

    def session_payload(runtime: SessionRuntime, actions: list[SystemAction]) -> dict:
        return {
            "session": to_jsonable(runtime.session),
            "actions": _dump_actions(actions),
        }

    # -- error mapping ---------------------------------------------------------

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ProtocolError)
    async def _protocol(request: Request, exc: ProtocolError):
        return JSONResponse(
            status_code=409, content={"detail": str(exc), "expected": exc.expected}
        )

    @app.exception_handler(IllegalStateError)
    async def _illegal(request: Request, exc: IllegalStateError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(DuplicateIdError)
    async def _duplicate(request: Request, exc: DuplicateIdError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(CorruptRecordError)
    async def _corrupt(request: Request, exc: CorruptRecordError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.exception_handler(StageError)
    async def _stage(request: Request, exc: StageError):
        return JSONResponse(
            status_code=502, content={"detail": str(exc), "retryable": True}
        )

    # -- sessions ------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    async def create_session(body: CreateSessionRequest):
        session, actions = engine.create_session(body.profile_id, body.peer_id)
        runtime = SessionRuntime(session=session)
        app.state.runtimes[session.id] = runtime
        broadcast(runtime, actions)
        store.save_session(session)
        store.append_actions(session.id, actions)
        return session_payload(runtime, actions)

    @app.post("/sessions/{session_id}/input")
    async def post_input(session_id: str, body: InputRequest):
        runtime = get_runtime(session_id)
        async with runtime.lock:
            key = body.idempotency_key
            if key is not None and key in runtime.idempotency:
                return runtime.idempotency[key]
            new_session, actions = await asyncio.to_thread(
                engine.handle_input, runtime.session, body.input
            )
            failed = any(isinstance(a, ErrorNoticeAction) for a in actions)
            if failed:
                # State is unchanged; surface the notice on both channels.
                broadcast(runtime, actions)
                store.append_actions(session_id, actions)
                notice = next(a for a in actions if isinstance(a, ErrorNoticeAction))
                return JSONResponse(
                    status_code=502,
                    content={"detail": notice.text, "retryable": notice.retryable},
                )
            runtime.session = new_session
            broadcast(runtime, actions)
            store.save_session(new_session)
            store.append_actions(session_id, actions)
            store.append_inputs(session_id, [body.input])
            payload = session_payload(runtime, actions)
            if key is not None:
                runtime.idempotency[key] = payload
            return payload

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        runtime = get_runtime(session_id)
        return {"session": to_jsonable(runtime.session)}

    @app.get("/sessions/{session_id}/strip")
    async def get_strip(session_id: str):
        runtime = get_runtime(session_id)
        stored = runtime.session.scenes
        scenes = {slot: stored.get(slot) or empty_scene(slot) for slot in SLOT_ORDER}
        return {
            "scenes": {slot.value: to_jsonable(scenes[slot]) for slot in SLOT_ORDER},
            "svg": {slot.value: svg.render_scene(scenes[slot]) for slot in SLOT_ORDER},
        }

    @app.get("/sessions/{session_id}/events")
    async def get_events(
        session_id: str,
        cursor: str = "0",
        follow: bool = True,
    ):
        runtime = get_runtime(session_id)
        try:
            start = int(cursor)
        except ValueError:
            start = 0
        if start < 0 or start > len(runtime.actions):
            start = 0  # unusable cursor: replay everything

        queue: asyncio.Queue = asyncio.Queue()
        backlog = list(enumerate(runtime.actions))[start:]
        live = follow and not runtime.closed
        if live:
            runtime.queues.add(queue)

        async def stream():
            next_index = start
            try:
                for index, action in backlog:
                    yield _sse_frame(index, action)
                    next_index = index + 1
                if not live:
                    yield _sse_end(len(runtime.actions))
                    return
                while True:
                    item = await queue.get()
                    if item is _END_SENTINEL:
                        yield _sse_end(len(runtime.actions))
                        return
                    index, action = item
                    if index < next_index:
                        continue  # already sent in the backlog
                    yield _sse_frame(index, action)
                    next_index = index + 1
            finally:
                runtime.queues.discard(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # -- journals and stats -------------------------------------------------------

    @app.get("/journals")
    async def list_journals(
        profile_id: str | None = None,
        date_from: str | None = Query(default=None, alias="from"),
        date_to: str | None = Query(default=None, alias="to"),
    ):
        parsed_from = date.fromisoformat(date_from) if date_from else None
        parsed_to = date.fromisoformat(date_to) if date_to else None
        entries = store.list_journals(
            profile_id=profile_id, date_from=parsed_from, date_to=parsed_to
        )
        return {"journals": [to_jsonable(e) for e in entries]}

    @app.get("/journals/{journal_id}")
    async def get_journal(journal_id: str):
        return {"journal": to_jsonable(store.load_journal(journal_id))}

    @app.get("/stats")
    async def get_stats(profile_id: str):
        sessions = []
        for entry in store.list_journals(profile_id=profile_id):
            try:
                session = store.load_session(entry.session_id)
            except NotFoundError:
                continue
            if session.phase is Phase.FINALIZED:
                sessions.append(session)
        stats = analytics.compute_usage_stats(sessions)
        return to_jsonable(stats)

    # -- registries -------------------------------------------------------------

    @app.post("/profiles", status_code=201)
    async def create_profile(body: ProfileCreate):
        profile = AdolescentProfile(
            id=body.id or engine.id_factory(),
            name=body.name,
            age=body.age,
            gender=body.gender,
            interests=body.interests,
        )
        violations = validate_profile(profile)
        if violations:
            return JSONResponse(status_code=422, content={"detail": violations})
        store.save_profile(profile)
        return {"profile": to_jsonable(profile)}

    @app.get("/profiles")
    async def list_profiles():
        return {"profiles": [to_jsonable(p) for p in store.list_profiles()]}

    @app.get("/profiles/{profile_id}")
    async def get_profile(profile_id: str):
        profile = store.get_profile(profile_id)
        if profile is None:
            raise NotFoundError(f"unknown profile {profile_id!r}")
        return {"profile": to_jsonable(profile)}

    @app.post("/peers", status_code=201)
    async def create_peer(body: PeerCreate):
        peer = PeerProfile(
            id=body.id or engine.id_factory(),
            name=body.name,
            voice_id=body.voice_id,
            avatar_ref=body.avatar_ref,
        )
        store.save_peer(peer)
        return {"peer": to_jsonable(peer)}

    @app.get("/peers")
    async def list_peers():
        return {"peers": [to_jsonable(p) for p in store.list_peers()]}

    @app.get("/peers/{peer_id}")
    async def get_peer(peer_id: str):
        peer = store.get_peer(peer_id)
        if peer is None:
            raise NotFoundError(f"unknown peer {peer_id!r}")
        return {"peer": to_jsonable(peer)}

    @app.post("/places", status_code=201)
    async def create_place(body: PlaceCreate):
        if store.get_profile(body.profile_id) is None:
            raise NotFoundError(f"unknown profile {body.profile_id!r}")
        place = PlaceEntry(
            id=body.id or engine.id_factory(),
            profile_id=body.profile_id,
            label=body.label,
            category=body.category,
        )
        store.save_place(place)
        return {"place": to_jsonable(place)}

    @app.get("/places")
    async def list_places(profile_id: str | None = None):
        return {"places": [to_jsonable(p) for p in store.list_places(profile_id)]}

    @app.post("/people", status_code=201)
    async def create_person(body: PersonCreate):
        if store.get_profile(body.profile_id) is None:
            raise NotFoundError(f"unknown profile {body.profile_id!r}")
        person = PersonEntry(
            id=body.id or engine.id_factory(),
            profile_id=body.profile_id,
            label=body.label,
            category=body.category,
        )
        store.save_person(person)
        return {"person": to_jsonable(person)}

    @app.get("/people")
    async def list_people(profile_id: str | None = None):
        return {"people": [to_jsonable(p) for p in store.list_people(profile_id)]}

    return app


def _sse_frame(index: int, action: SystemAction) -> str:
    # id carries the resume cursor: the index after this event.
    return f"id: {index + 1}\nevent: action\ndata: {canonical_json(action)}\n\n"


def _sse_end(total: int) -> str:
    return f'id: {total}\nevent: end\ndata: {{"total":{total}}}\n\n'
