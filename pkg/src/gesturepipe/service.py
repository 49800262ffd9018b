"""Network service hosting live gesture sessions.

HTTP controls sessions; WebSockets carry the landmark stream in and the event
stream out:

    POST /v1/sessions                  {"mode": "confirm"|"auto"} -> {"id": ...}
    WS   /v1/sessions/{id}/frames      client sends NDJSON landmark records
    WS   /v1/sessions/{id}/events      server sends {"session","seq","type","payload"}
    POST /v1/sessions/{id}/commands/{cmd_id}
                                       {"verdict": "confirm"|"override"|"reject",
                                        "command": optional}
    GET  /v1/health

Each session is processed under its own lock, so events get a gapless,
strictly increasing sequence no matter how the transport interleaves. Event
subscribers receive the full ordered stream from subscription time; the first
message on the events socket is a snapshot (pending commands, mode, last seq)
so a reconnecting console can resync.
"""

from __future__ import annotations

import asyncio
import logging
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .cache import RecognitionCache
from .config import AppConfig
from .gateway import BackendConfig, Gateway, RemoteBackend, RulesBackend
from .pipeline import GesturePipeline, PipelineConfig, PipelineEvent
from .rendering import PromptLibrary
from .router import command_from_dict, load_registry

logger = logging.getLogger(__name__)

CONFIRM = "confirm"
AUTO = "auto"


@dataclass
class SessionState:
    id: str
    mode: str
    pipeline: GesturePipeline
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    seq: int = 0
    next_cmd: int = 0
    pending: dict[str, dict] = field(default_factory=dict)  # cmd_id -> decision summary
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    frames_closed: bool = False

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def new_cmd_id(self) -> str:
        self.next_cmd += 1
        return f"c{self.next_cmd}"


class SessionHub:
    """All live sessions plus the shared gateway/cache/registry handles."""

    def __init__(self, cfg: AppConfig):
        self.cfg = cfg
        self.registry = load_registry(cfg.registry_path)
        if cfg.backend == "remote":
            backend = RemoteBackend(cfg.backend_cfg)
        else:
            backend = RulesBackend()
        self.gateway = Gateway(backend, PromptLibrary(cfg.template_dir))
        self.cache = RecognitionCache(path=cfg.cache_path,
                                      threshold=cfg.cache_threshold)
        self.sessions: dict[str, SessionState] = {}

    def create_session(self, mode: str) -> SessionState:
        pipeline = GesturePipeline(
            gateway=self.gateway,
            registry=self.registry,
            cache=self.cache,
            config=PipelineConfig(
                min_confidence=self.cfg.min_confidence,
                window_size=self.cfg.window_size,
                auto_dispatch=(mode == AUTO),
            ),
        )
        state = SessionState(id=uuid.uuid4().hex, mode=mode, pipeline=pipeline)
        self.sessions[state.id] = state
        return state

    def get(self, session_id: str) -> SessionState:
        state = self.sessions.get(session_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown session id")
        return state


def _emit(state: SessionState, event: PipelineEvent) -> dict:
    """Assign a sequence number and fan out to every subscriber. Must be
    called while holding the session lock."""
    record = {
        "session": state.id,
        "seq": state.next_seq(),
        "type": event.type,
        "payload": event.payload,
    }
    for queue in state.subscribers:
        queue.put_nowait(record)
    return record


def _emit_pipeline_events(state: SessionState, events: list[PipelineEvent]) -> list[dict]:
    out = []
    for event in events:
        if event.type == "CommandPending":
            cmd_id = state.new_cmd_id()
            payload = {"cmd_id": cmd_id, **event.payload}
            state.pending[cmd_id] = event.payload["decision"]
            event = PipelineEvent("CommandPending", payload)
        out.append(_emit(state, event))
    return out


def build_app(cfg: AppConfig | None = None) -> FastAPI:
    cfg = cfg or AppConfig()
    app = FastAPI(title="gesturepipe session service")
    # desk tool, no auth by design; the operator console may be served from
    # a different local port
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    hub = SessionHub(cfg)
    app.state.hub = hub

    @app.get("/v1/health")
    async def health():
        return {"status": "ok"}

    @app.post("/v1/sessions")
    async def create_session(body: dict | None = None):
        mode = (body or {}).get("mode", cfg.mode)
        if mode not in (CONFIRM, AUTO):
            return JSONResponse(
                status_code=400,
                content={"error": f'mode must be "{CONFIRM}" or "{AUTO}", got {mode!r}'})
        state = hub.create_session(mode)
        return {"id": state.id, "mode": state.mode}

    @app.post("/v1/sessions/{session_id}/commands/{cmd_id}")
    async def resolve_command(session_id: str, cmd_id: str, body: dict):
        state = hub.get(session_id)
        verdict = body.get("verdict")
        if verdict not in ("confirm", "override", "reject"):
            raise HTTPException(status_code=400, detail="bad verdict")
        async with state.lock:
            if cmd_id not in state.pending:
                raise HTTPException(status_code=404,
                                    detail=f"unknown command id {cmd_id!r}")
            decision = state.pending.pop(cmd_id)
            events: list[PipelineEvent] = []
            if verdict == "reject":
                events.append(PipelineEvent("CommandRejected", {
                    "cmd_id": cmd_id, "reason": "rejected by operator"}))
            elif verdict == "override":
                raw = body.get("command")
                if not isinstance(raw, dict):
                    raise HTTPException(status_code=400,
                                        detail="override requires a command object")
                try:
                    replacement = command_from_dict(raw)
                except Exception as exc:
                    raise HTTPException(status_code=400, detail=str(exc))
                ev = state.pipeline.dispatch_command(replacement)
                ev = PipelineEvent(ev.type, {"cmd_id": cmd_id, **ev.payload})
                events.append(ev)
            else:  # confirm: dispatch the decision as decided
                for raw in decision.get("commands", []):
                    cmd = command_from_dict(raw)
                    ev = state.pipeline.dispatch_command(cmd)
                    ev = PipelineEvent(ev.type, {"cmd_id": cmd_id, **ev.payload})
                    events.append(ev)
            emitted = [_emit(state, ev) for ev in events]
        return {"events": [{"seq": e["seq"], "type": e["type"]} for e in emitted]}

    @app.websocket("/v1/sessions/{session_id}/frames")
    async def frames_socket(ws: WebSocket, session_id: str):
        state = hub.sessions.get(session_id)
        await ws.accept()
        if state is None:
            await ws.close(code=4404, reason="unknown session id")
            return
        try:
            while True:
                line = await ws.receive_text()
                async with state.lock:
                    if state.frames_closed:
                        fatal = True
                    else:
                        events = await asyncio.to_thread(state.pipeline.process_line, line)
                        _emit_pipeline_events(state, events)
                        fatal = any(e.payload.get("fatal") for e in events)
                        state.frames_closed = state.frames_closed or fatal
                if fatal:
                    await ws.close(code=4400, reason="session stream closed")
                    return
        except WebSocketDisconnect:
            return

    @app.websocket("/v1/sessions/{session_id}/events")
    async def events_socket(ws: WebSocket, session_id: str):
        state = hub.sessions.get(session_id)
        await ws.accept()
        if state is None:
            await ws.close(code=4404, reason="unknown session id")
            return
        queue: asyncio.Queue = asyncio.Queue()
        async with state.lock:
            snapshot = {
                "session": state.id,
                "type": "snapshot",
                "seq": state.seq,
                "payload": {
                    "mode": state.mode,
                    "pending": [
                        {"cmd_id": cmd_id, "decision": decision}
                        for cmd_id, decision in state.pending.items()
                    ],
                },
            }
            state.subscribers.append(queue)
        try:
            await ws.send_json(snapshot)
            while True:
                record = await queue.get()
                await ws.send_json(record)
        except WebSocketDisconnect:
            pass
        finally:
            async with state.lock:
                if queue in state.subscribers:
                    state.subscribers.remove(queue)

    return app
