"""Control service: in-process platform state plus its HTTP face.

The Platform object owns one Registry, the loaded pipeline definitions, the
run sessions, and an event log. create_app() wraps a Platform in a FastAPI
application; every response body is versioned with a top-level ``v`` and
every error body carries a stable machine-readable ``code``.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import BadDefinitionError, NotFoundError, PlatformError
from .matcher import plan_graph
from .pipeline_io import load_pipeline
from .registry import HamManifest, Registry
from .runtime import RunSession, session_stats, start_run

API_VERSION = 1
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8070

# Domain errors whose natural HTTP shape is a conflict rather than a bad
# request: the payload was well-formed but the platform cannot honour it now.
_CONFLICT_CODES = {
    "duplicate_id",
    "duplicate_processor",
    "not_deployable",
    "stale_handle",
    "plan_infeasible",
    "commit_failed",
    "invalid_state",
    "put_after_close",
}


class EventLog:
    """Append-only ring buffer of platform events with monotonic sequence."""

    def __init__(self, capacity: int = 1000):
        self.capacity = int(capacity)
        self._events: list[dict] = []
        self._next_seq = 1
        self._cond = threading.Condition()

    def append(self, kind: str, data: dict) -> dict:
        with self._cond:
            event = {"seq": self._next_seq, "ts": time.time(), "kind": kind, "data": data}
            self._next_seq += 1
            self._events.append(event)
            if len(self._events) > self.capacity:
                del self._events[: len(self._events) - self.capacity]
            self._cond.notify_all()
            return event

    def since(self, after: int) -> list[dict]:
        with self._cond:
            return [e for e in self._events if e["seq"] > after]

    @property
    def latest_seq(self) -> int:
        with self._cond:
            return self._next_seq - 1

    def wait_for(self, after: int, timeout: float) -> list[dict]:
        """Block until an event newer than ``after`` exists (or timeout)."""
        deadline = time.monotonic() + timeout
        with self._cond:
            while True:
                fresh = [e for e in self._events if e["seq"] > after]
                if fresh:
                    return fresh
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)


class Platform:
    """Everything one control service instance manages."""

    def __init__(self):
        self.registry = Registry()
        self.pipelines: dict[str, dict] = {}
        self.sessions: dict[str, RunSession] = {}
        self.session_pipeline: dict[str, str] = {}
        self.events = EventLog()
        self._lock = threading.RLock()
        self._session_counter = 0

    # -- manifests -----------------------------------------------------

    def load_ham(self, doc: dict) -> dict:
        manifest = HamManifest.from_dict(doc) if isinstance(doc, dict) else doc
        proc_ids = self.registry.load_ham(manifest)
        info = {"ham_id": manifest.ham_id, "name": manifest.name, "processors": proc_ids}
        self.events.append("ham_loaded", info)
        return info

    # -- pipelines -----------------------------------------------------

    def load_pipeline(self, doc: dict) -> dict:
        pipeline_id, graph = load_pipeline(doc)
        violations = [v.as_dict() for v in graph.validate()]
        with self._lock:
            self.pipelines[pipeline_id] = {"doc": doc, "graph": graph}
        info = {"id": pipeline_id, "violations": violations}
        self.events.append("pipeline_loaded", {"id": pipeline_id})
        return info

    def pipeline_ids(self) -> list[str]:
        with self._lock:
            return sorted(self.pipelines)

    def _graph(self, pipeline_id: str):
        with self._lock:
            entry = self.pipelines.get(pipeline_id)
        if entry is None:
            raise NotFoundError(f"no pipeline {pipeline_id!r}")
        return entry["graph"]

    def pipeline_detail(self, pipeline_id: str) -> dict:
        graph = self._graph(pipeline_id)
        with self._lock:
            doc = self.pipelines[pipeline_id]["doc"]
        return {
            "id": pipeline_id,
            "doc": doc,
            "violations": [v.as_dict() for v in graph.validate()],
        }

    # -- planning and runs ----------------------------------------------

    def plan(self, pipeline_id: str, mode: str = "greedy") -> dict:
        graph = self._graph(pipeline_id)
        plan = plan_graph(graph, self.registry, mode=mode)
        result = plan.as_dict()
        self.events.append(
            "plan_computed",
            {"pipeline": pipeline_id, "mode": mode, "status": plan.status},
        )
        return result

    def start(self, pipeline_id: str, mode: str = "greedy") -> dict:
        graph = self._graph(pipeline_id)
        with self._lock:
            self._session_counter += 1
            session_id = f"s{self._session_counter}"

        def on_transition(sid: str, state: str) -> None:
            self.events.append("session_state", {"session": sid, "state": state})

        session = start_run(
            graph,
            self.registry,
            mode=mode,
            session_id=session_id,
            on_transition=on_transition,
        )
        with self._lock:
            self.sessions[session_id] = session
            self.session_pipeline[session_id] = pipeline_id
        return {"session": session_id, "state": session.state, "pipeline": pipeline_id}

    def _session(self, session_id: str) -> RunSession:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"no session {session_id!r}")
        return session

    def stop(self, session_id: str) -> dict:
        session = self._session(session_id)
        session.request_stop()
        session.wait(timeout=10.0)
        return {"session": session_id, "state": session.state}

    def session_info(self, session_id: str) -> dict:
        session = self._session(session_id)
        info = session_stats(session)
        info["pipeline"] = self.session_pipeline.get(session_id)
        return info

    def session_rows(self) -> list[dict]:
        with self._lock:
            items = list(self.sessions.items())
        return [
            {
                "session": sid,
                "state": s.state,
                "pipeline": self.session_pipeline.get(sid),
            }
            for sid, s in items
        ]

    # -- fleet -----------------------------------------------------------

    def processor_rows(self) -> list[dict]:
        return [p.summary() for p in self.registry.processors()]


def error_body(exc: PlatformError) -> dict:
    body = {"code": exc.code, "message": str(exc)}
    extra = exc.payload()
    for key, value in extra.items():
        if key not in ("code", "message"):
            body[key] = value
    return body


def status_for(exc: PlatformError) -> int:
    if isinstance(exc, NotFoundError):
        return 404
    if exc.code in _CONFLICT_CODES:
        return 409
    return 400


def create_app(platform: Platform | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    platform = platform or Platform()
    app = FastAPI(title="hetflow control service", docs_url=None, redoc_url=None)
    app.state.platform = platform

    @app.exception_handler(PlatformError)
    async def _platform_error(request: Request, exc: PlatformError):
        return JSONResponse(
            status_code=status_for(exc),
            content={"v": API_VERSION, "error": error_body(exc)},
        )

    async def _json_body(request: Request) -> dict:
        try:
            doc = await request.json()
        except Exception:
            raise BadDefinitionError("request body must be JSON")
        if not isinstance(doc, dict):
            raise BadDefinitionError("request body must be a JSON object")
        return doc

    @app.get("/healthz")
    async def healthz():
        return {"v": API_VERSION, "status": "ok"}

    @app.get("/processors")
    async def processors():
        return {"v": API_VERSION, "processors": platform.processor_rows()}

    @app.post("/hams")
    async def load_ham(request: Request):
        doc = await _json_body(request)
        return {"v": API_VERSION, "ham": platform.load_ham(doc)}

    @app.get("/pipelines")
    async def pipelines():
        return {"v": API_VERSION, "pipelines": platform.pipeline_ids()}

    @app.post("/pipelines")
    async def load_pipeline_ep(request: Request):
        doc = await _json_body(request)
        return {"v": API_VERSION, "pipeline": platform.load_pipeline(doc)}

    @app.get("/pipelines/{pipeline_id}")
    async def pipeline_detail(pipeline_id: str):
        return {"v": API_VERSION, "pipeline": platform.pipeline_detail(pipeline_id)}

    @app.post("/pipelines/{pipeline_id}/plan")
    async def plan(pipeline_id: str, mode: str = "greedy"):
        _check_mode(mode)
        return {"v": API_VERSION, "plan": platform.plan(pipeline_id, mode=mode)}

    @app.post("/pipelines/{pipeline_id}/start")
    async def start(pipeline_id: str, mode: str = "greedy"):
        _check_mode(mode)
        return {"v": API_VERSION, "run": platform.start(pipeline_id, mode=mode)}

    @app.get("/sessions")
    async def sessions():
        return {"v": API_VERSION, "sessions": platform.session_rows()}

    @app.get("/sessions/{session_id}")
    async def session(session_id: str):
        return {"v": API_VERSION, "session": platform.session_info(session_id)}

    @app.post("/sessions/{session_id}/stop")
    async def stop(session_id: str):
        return {"v": API_VERSION, "run": platform.stop(session_id)}

    @app.get("/events")
    async def events(after: int = 0, stream: int = 0, wait: float = 0.0):
        if stream:
            return StreamingResponse(_event_stream(after), media_type="text/event-stream")
        if wait > 0:
            fresh = await _to_thread(platform.events.wait_for, after, min(wait, 30.0))
        else:
            fresh = platform.events.since(after)
        return {
            "v": API_VERSION,
            "events": fresh,
            "latest": platform.events.latest_seq,
        }

    def _event_stream(after: int):
        cursor = after
        idle = 0
        while idle < 120:
            fresh = platform.events.wait_for(cursor, timeout=0.5)
            if not fresh:
                idle += 1
                yield ": keep-alive\n\n"
                continue
            idle = 0
            for event in fresh:
                cursor = event["seq"]
                yield f"data: {json.dumps(event)}\n\n"

    def _check_mode(mode: str) -> None:
        if mode not in ("greedy", "exhaustive"):
            raise BadDefinitionError(f"mode must be greedy or exhaustive, got {mode!r}")

    async def _to_thread(fn, *args):
        import anyio

        return await anyio.to_thread.run_sync(fn, *args)

    if ui_dir:
        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def serve(
    platform: Platform | None = None,
    host: str = DEFAULT_HOST,
    port: int = DEFAULT_PORT,
    ui_dir: str | Path | None = None,
):
    """Run the control service in the foreground (blocking)."""
    import uvicorn

    app = create_app(platform, ui_dir=ui_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    sock = server.config.bind_socket()
    actual = sock.getsockname()
    print(f"listening on http://{actual[0]}:{actual[1]}", flush=True)
    server.run(sockets=[sock])
