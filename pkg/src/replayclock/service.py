"""HTTP/JSON session service for the replay explorer.

Lists the traces in a directory, pages their events for swimlane rendering,
and manages interactive replay sessions (create, step, auto-step, reset).
Every response that mutates a session returns a full canonical snapshot, so a
client can always re-render from the latest response alone.  Sessions live in
memory and expire after an idle period.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .codec import CodecLayout
from .replay import (
    NotInFrontline,
    ReplaySession,
    session_auto_step,
    session_new,
    session_reset,
    session_step,
)
from .sim import EventRecord, Trace, TraceFormatError, _event_to_dict, read_trace

DEFAULT_SESSION_TTL = 3600.0


@dataclass
class _TraceEntry:
    trace: Trace
    mtime: float
    by_id: Dict[int, EventRecord]
    layout: CodecLayout


class TraceStore:
    """Lazily loaded, mtime-invalidated view of a directory of traces."""

    def __init__(self, trace_dir: str):
        self.trace_dir = trace_dir
        self._cache: Dict[str, _TraceEntry] = {}

    def ids(self) -> List[str]:
        try:
            names = sorted(os.listdir(self.trace_dir))
        except FileNotFoundError:
            return []
        return [n[:-6] for n in names if n.endswith(".jsonl")]

    def get(self, trace_id: str) -> _TraceEntry:
        path = os.path.join(self.trace_dir, f"{trace_id}.jsonl")
        if not os.path.isfile(path):
            raise KeyError(trace_id)
        mtime = os.path.getmtime(path)
        entry = self._cache.get(trace_id)
        if entry is None or entry.mtime != mtime:
            trace = read_trace(path)
            entry = _TraceEntry(
                trace=trace,
                mtime=mtime,
                by_id={ev.event_id: ev for ev in trace.events},
                layout=CodecLayout.for_config(trace.config.clock),
            )
            self._cache[trace_id] = entry
        return entry


@dataclass
class _SessionEntry:
    session: ReplaySession
    trace_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)


class SessionCreate(BaseModel):
    trace_id: str
    seed: int = 0


class StepBody(BaseModel):
    event_id: int


class AutoStepBody(BaseModel):
    count: int = 1


def create_app(trace_dir: str, session_ttl: float = DEFAULT_SESSION_TTL) -> FastAPI:
    app = FastAPI(title="replayclock explorer service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = TraceStore(trace_dir)
    sessions: Dict[str, _SessionEntry] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    def _purge_idle() -> None:
        now = time.monotonic()
        stale = [sid for sid, e in sessions.items() if now - e.last_access > session_ttl]
        for sid in stale:
            sessions.pop(sid, None)

    def _get_trace(trace_id: str) -> _TraceEntry:
        try:
            return store.get(trace_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown trace {trace_id!r}")
        except TraceFormatError as exc:
            raise HTTPException(status_code=500, detail=f"unreadable trace: {exc}")

    def _get_session(session_id: str) -> _SessionEntry:
        with registry_lock:
            _purge_idle()
            entry = sessions.get(session_id)
            if entry is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            entry.last_access = time.monotonic()
            return entry

    def _snapshot(session_id: str, entry: _SessionEntry) -> dict:
        tentry = store.get(entry.trace_id)
        summaries = []
        for eid in sorted(entry.session.frontline):
            ev = tentry.by_id[eid]
            summaries.append(
                {
                    "event_id": ev.event_id,
                    "proc": ev.proc,
                    "kind": ev.kind,
                    "pt": ev.pt,
                    "mx": ev.repcl.mx,
                }
            )
        return {
            "session_id": session_id,
            "trace_id": entry.trace_id,
            "chosen_prefix": list(entry.session.chosen_prefix),
            "frontline": summaries,
            "remaining_count": len(entry.session.remaining),
        }

    @app.get("/traces")
    def list_traces() -> List[dict]:
        out = []
        for trace_id in store.ids():
            try:
                entry = store.get(trace_id)
            except (KeyError, TraceFormatError):
                continue
            cfg = entry.trace.config
            out.append(
                {
                    "trace_id": trace_id,
                    "n": cfg.clock.n,
                    "epsilon_time": cfg.clock.epsilon_time,
                    "interval": cfg.clock.interval,
                    "alpha": cfg.alpha,
                    "delta": cfg.delta,
                    "event_count": len(entry.trace.events),
                }
            )
        return out

    @app.get("/traces/{trace_id}/events")
    def page_events(
        trace_id: str,
        from_: int = Query(0, alias="from", ge=0),
        limit: int = Query(500, ge=1, le=5000),
    ) -> dict:
        entry = _get_trace(trace_id)
        events = entry.trace.events[from_ : from_ + limit]
        return {
            "trace_id": trace_id,
            "from": from_,
            "limit": limit,
            "total": len(entry.trace.events),
            "events": [_event_to_dict(ev, entry.layout) for ev in events],
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate) -> dict:
        tentry = _get_trace(body.trace_id)
        session = session_new(tentry.trace, body.seed)
        session_id = uuid.uuid4().hex
        with registry_lock:
            _purge_idle()
            sessions[session_id] = _SessionEntry(session=session, trace_id=body.trace_id)
        return _snapshot(session_id, sessions[session_id])

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        entry = _get_session(session_id)
        with entry.lock:
            return _snapshot(session_id, entry)

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str, body: StepBody) -> dict:
        entry = _get_session(session_id)
        with entry.lock:
            try:
                session_step(entry.session, body.event_id)
            except NotInFrontline as exc:
                raise HTTPException(
                    status_code=409,
                    detail={
                        "error": "event is not in the current frontline",
                        "event_id": exc.event_id,
                        "frontline": sorted(exc.frontline),
                    },
                )
            return _snapshot(session_id, entry)

    @app.post("/sessions/{session_id}/auto-step")
    def auto_step(session_id: str, body: AutoStepBody) -> dict:
        if body.count < 0:
            raise HTTPException(status_code=400, detail="count must be >= 0")
        entry = _get_session(session_id)
        with entry.lock:
            for _ in range(body.count):
                if session_auto_step(entry.session) is None:
                    break
            return _snapshot(session_id, entry)

    @app.post("/sessions/{session_id}/reset")
    def reset(session_id: str) -> dict:
        entry = _get_session(session_id)
        with entry.lock:
            session_reset(entry.session)
            return _snapshot(session_id, entry)

    return app
