"""HTTP + WebSocket service for operator-driven sessions.

Lifecycle endpoints create/start/stop sessions backed by the realtime
engine running in a worker thread; a per-session event list fans out to
any number of stream subscribers (snapshot first, then deltas).  Sessions
and models persist as flat files under DATA_DIR:

    data/sessions/<id>/meta.json, frames.csv, predictions.ndjson
    data/models/<id>.json (+ <id>.variance.json sidecar from train jobs)
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field
from starlette.concurrency import run_in_threadpool

from .acquisition import FrameSource, SyntheticProfile, default_profile, replay_source, synthetic_source
from .cleaning import IqrConfig, clean_dataset
from .core import Dataset, EmotionLabel, SampleRecord, SubjectInfo, load_dataset, save_dataset
from .evaluation import VarianceTable, variance_table
from .forest import Forest, TrainConfig, load_forest, save_forest, train
from .realtime import (
    CalibrationIncompleteError,
    SessionConfig,
    SessionLog,
    SessionState,
    compare_session_variance,
    run_session,
)

DEFAULT_PORT = 8080


def _err(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


class SubjectModel(BaseModel):
    code: str
    age: int
    gender: str = ""
    civil_status: str = ""
    education: str = ""


class SourceModel(BaseModel):
    type: str  # "replay" | "synthetic"
    path: Optional[str] = None
    label: Optional[str] = None
    profile: Optional[str] = None
    seed: int = 0


class SessionConfigModel(BaseModel):
    calibration_s: float = 30.0
    window_s: float = 10.0
    session_s: float = 300.0
    rate_hz: float = 33.0


class CreateSessionRequest(BaseModel):
    subject: SubjectModel
    source: SourceModel
    model_id: str
    config: SessionConfigModel = Field(default_factory=SessionConfigModel)
    pace: str = "real"  # "real" sleeps to wall clock; "fast" replays immediately


class TrainRequest(BaseModel):
    dataset: str
    config: dict = Field(default_factory=dict)
    clean: bool = False  # IQR-clean before training


class _PacedSource(FrameSource):
    """Maps logical timestamps onto the wall clock for live sessions."""

    def __init__(self, source: FrameSource):
        self._source = source
        self._start: Optional[float] = None
        self.nominal_rate_hz = source.nominal_rate_hz

    def next_frame(self):
        frame = self._source.next_frame()
        if frame is None:
            return None
        now = time.monotonic()
        if self._start is None:
            self._start = now
        delay = self._start + frame.timestamp_ms / 1000.0 - now
        if delay > 0:
            time.sleep(delay)
        return frame


class SessionRuntime:
    """One session's live state: engine thread, event history, fanout."""

    def __init__(self, resource: dict, session_dir: Path):
        self.resource = resource
        self.session_dir = session_dir
        self.events: list[dict] = []
        self.cond = threading.Condition()
        self.stop_event = threading.Event()
        self.thread: Optional[threading.Thread] = None
        self.log: Optional[SessionLog] = None
        self.error: Optional[str] = None
        self.last_quality: Optional[dict] = None
        self.predictions: list[dict] = []

    @property
    def state(self) -> str:
        return self.resource["state"]

    def emit(self, event: dict) -> None:
        with self.cond:
            self.events.append(event)
            if event["type"] == "state":
                self.resource["state"] = event["state"]
            elif event["type"] == "quality":
                self.last_quality = event
            elif event["type"] == "prediction":
                self.predictions.append({k: v for k, v in event.items() if k != "type"})
            self.cond.notify_all()

    def terminal(self) -> bool:
        return self.resource["state"] == SessionState.STOPPED.value and (
            self.thread is None or not self.thread.is_alive()
        )

    def snapshot(self) -> tuple[dict, int]:
        """Current state plus everything so far; cursor marks the delta start."""
        with self.cond:
            snap = {
                "type": "snapshot",
                "state": self.resource["state"],
                "quality": self.last_quality,
                "predictions": list(self.predictions),
                "stop_reason": self.resource.get("stop_reason", ""),
                "config": self.resource["config"],
            }
            return snap, len(self.events)

    def wait_events(self, cursor: int, timeout: float) -> tuple[list[dict], bool]:
        with self.cond:
            if len(self.events) <= cursor:
                self.cond.wait(timeout)
            fresh = self.events[cursor:]
        return fresh, self.terminal()


class ServiceState:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.models_dir = self.data_dir / "models"
        self.sessions_dir = self.data_dir / "sessions"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, SessionRuntime] = {}
        self.jobs: dict[str, dict] = {}
        self.lock = threading.Lock()
        self.train_pool = ThreadPoolExecutor(max_workers=1)
        self._forest_cache: dict[str, Forest] = {}
        self._load_persisted_sessions()

    # ---- models ----
    def model_path(self, model_id: str) -> Path:
        return self.models_dir / f"{model_id}.json"

    def model_exists(self, model_id: str) -> bool:
        return self.model_path(model_id).is_file()

    def load_model(self, model_id: str) -> Forest:
        if model_id not in self._forest_cache:
            self._forest_cache[model_id] = load_forest(self.model_path(model_id))
        return self._forest_cache[model_id]

    def list_models(self) -> list[dict]:
        out = []
        for p in sorted(self.models_dir.glob("*.json")):
            if p.name.endswith(".variance.json"):
                continue
            try:
                with open(p, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                out.append(
                    {
                        "id": p.stem,
                        "labels": doc.get("labels", []),
                        "n_trees": doc.get("config", {}).get("n_trees"),
                    }
                )
            except (OSError, json.JSONDecodeError):
                continue
        return out

    def model_variance(self, model_id: str) -> Optional[VarianceTable]:
        sidecar = self.models_dir / f"{model_id}.variance.json"
        if not sidecar.is_file():
            return None
        with open(sidecar, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        labels = tuple(EmotionLabel[name] for name in doc["labels"])
        return VarianceTable(labels=labels, values=np.array(doc["values"], dtype=np.float64))

    def save_model_variance(self, model_id: str, table: VarianceTable) -> None:
        sidecar = self.models_dir / f"{model_id}.variance.json"
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(
                {"labels": [lab.name for lab in table.labels], "values": table.values.tolist()}, fh
            )

    # ---- sessions ----
    def _load_persisted_sessions(self) -> None:
        for meta_path in self.sessions_dir.glob("*/meta.json"):
            try:
                with open(meta_path, "r", encoding="utf-8") as fh:
                    meta = json.load(fh)
            except (OSError, json.JSONDecodeError):
                continue
            runtime = SessionRuntime(meta, meta_path.parent)
            pred_path = meta_path.parent / "predictions.ndjson"
            if pred_path.is_file():
                with open(pred_path, "r", encoding="utf-8") as fh:
                    runtime.predictions = [json.loads(line) for line in fh if line.strip()]
            self.sessions[meta["id"]] = runtime

    def persist_session(self, runtime: SessionRuntime) -> None:
        runtime.session_dir.mkdir(parents=True, exist_ok=True)
        with open(runtime.session_dir / "meta.json", "w", encoding="utf-8") as fh:
            json.dump(runtime.resource, fh, indent=2)
        log = runtime.log
        if log is not None:
            if log.frames:
                save_dataset(Dataset.from_records(log.frames), runtime.session_dir / "frames.csv")
            with open(runtime.session_dir / "predictions.ndjson", "w", encoding="utf-8") as fh:
                for p in log.predictions:
                    fh.write(json.dumps(p.to_json_dict()) + "\n")


def create_app(data_dir: str | Path | None = None, console_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("DATA_DIR", "./data"))
    app = FastAPI(title="eegemotion session service")
    state = ServiceState(data_dir)
    app.state.service = state

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    def _get_runtime(session_id: str) -> SessionRuntime:
        runtime = state.sessions.get(session_id)
        if runtime is None:
            raise _err(404, "session-not-found", f"no session {session_id}")
        return runtime

    def _build_source(spec: dict, config: SessionConfig) -> FrameSource:
        if spec["type"] == "replay":
            ds = load_dataset(spec["path"])
            return replay_source(ds, config.rate_hz)
        profile = SyntheticProfile.load(spec["profile"]) if spec.get("profile") else default_profile()
        label = EmotionLabel[spec["label"]]
        return synthetic_source(profile, label, seed=spec.get("seed", 0))

    def _session_config(resource: dict) -> SessionConfig:
        c = resource["config"]
        return SessionConfig(
            calibration_s=c["calibration_s"],
            window_s=c["window_s"],
            session_s=c["session_s"],
            rate_hz=c["rate_hz"],
        )

    def _public(resource: dict) -> dict:
        runtime = state.sessions.get(resource["id"])
        out = dict(resource)
        out["n_predictions"] = len(runtime.predictions) if runtime else 0
        return out

    # ---- session endpoints ----
    @app.post("/api/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        if not state.model_exists(req.model_id):
            raise _err(404, "model-not-found", f"no model {req.model_id}")
        try:
            SubjectInfo(**req.subject.model_dump())
        except ValueError as e:
            raise _err(422, "bad-subject", str(e))
        src = req.source.model_dump()
        if src["type"] == "replay":
            if not src.get("path") or not os.path.isfile(src["path"]):
                raise _err(422, "bad-source", f"replay path not readable: {src.get('path')}")
        elif src["type"] == "synthetic":
            if src.get("label") not in EmotionLabel.__members__:
                raise _err(422, "bad-source", f"unknown label {src.get('label')!r}")
            if src.get("profile") and not os.path.isfile(src["profile"]):
                raise _err(422, "bad-source", f"profile not readable: {src['profile']}")
        else:
            raise _err(422, "bad-source", f"unknown source type {src['type']!r}")
        if req.pace not in ("real", "fast"):
            raise _err(422, "bad-pace", f"pace must be 'real' or 'fast', got {req.pace!r}")
        try:
            _session_config({"config": req.config.model_dump()})
        except ValueError as e:
            raise _err(422, "bad-config", str(e))

        session_id = f"s-{uuid.uuid4().hex[:12]}"
        resource = {
            "id": session_id,
            "subject": req.subject.model_dump(),
            "source": src,
            "model_id": req.model_id,
            "config": req.config.model_dump(),
            "pace": req.pace,
            "state": SessionState.IDLE.value,
            "stop_reason": "",
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        runtime = SessionRuntime(resource, state.sessions_dir / session_id)
        with state.lock:
            state.sessions[session_id] = runtime
        state.persist_session(runtime)
        return _public(resource)

    @app.get("/api/sessions")
    def list_sessions():
        with state.lock:
            return [_public(rt.resource) for rt in state.sessions.values()]

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return _public(_get_runtime(session_id).resource)

    @app.post("/api/sessions/{session_id}/start")
    def start_session(session_id: str):
        runtime = _get_runtime(session_id)
        with state.lock:
            if runtime.state != SessionState.IDLE.value:
                raise _err(409, "bad-state", f"cannot start a session in state {runtime.state}")
            runtime.resource["state"] = SessionState.CALIBRATING.value
        config = _session_config(runtime.resource)
        forest = state.load_model(runtime.resource["model_id"])
        source = _build_source(runtime.resource["source"], config)
        if runtime.resource["pace"] == "real":
            source = _PacedSource(source)

        def engine():
            try:
                log = run_session(source, forest, config, sink=runtime.emit, stop=runtime.stop_event)
                runtime.log = log
                runtime.resource["stop_reason"] = log.stop_reason
            except CalibrationIncompleteError as e:
                runtime.log = e.log
                runtime.error = str(e)
                runtime.resource["stop_reason"] = "calibration-incomplete"
                runtime.emit({"type": "state", "state": SessionState.STOPPED.value, "t_s": 0.0})
            except Exception as e:  # surfaced via the resource, not lost in the thread
                runtime.error = f"{type(e).__name__}: {e}"
                runtime.resource["stop_reason"] = "error"
                runtime.emit({"type": "state", "state": SessionState.STOPPED.value, "t_s": 0.0})
            finally:
                state.persist_session(runtime)
                with runtime.cond:
                    runtime.cond.notify_all()

        runtime.thread = threading.Thread(target=engine, name=f"engine-{session_id}", daemon=True)
        runtime.thread.start()
        return _public(runtime.resource)

    @app.post("/api/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        runtime = _get_runtime(session_id)
        if runtime.state not in (SessionState.CALIBRATING.value, SessionState.RUNNING.value):
            raise _err(409, "bad-state", f"cannot stop a session in state {runtime.state}")
        runtime.stop_event.set()
        if runtime.thread is not None:
            runtime.thread.join(timeout=30.0)
        return _public(runtime.resource)

    @app.get("/api/sessions/{session_id}/variance-report")
    def variance_report(session_id: str):
        runtime = _get_runtime(session_id)
        if runtime.state != SessionState.STOPPED.value:
            raise _err(409, "bad-state", "variance report requires a stopped session")
        log = runtime.log
        if log is None:
            frames_path = runtime.session_dir / "frames.csv"
            if not frames_path.is_file():
                raise _err(404, "no-frames", "session has no captured frames")
            ds = load_dataset(frames_path)
            log = SessionLog(config=_session_config(runtime.resource))
            log.frames = list(ds)
        table = state.model_variance(runtime.resource["model_id"])
        if table is None:
            src = runtime.resource["source"]
            profile = SyntheticProfile.load(src["profile"]) if src.get("profile") else default_profile()
            table = VarianceTable(labels=profile.labels, values=profile.variances)
        try:
            report = compare_session_variance(log, table)
        except ValueError as e:
            raise _err(422, "insufficient-frames", str(e))
        return report.to_json_dict()

    # ---- event stream ----
    @app.websocket("/api/sessions/{session_id}/events")
    async def stream_events(ws: WebSocket, session_id: str):
        runtime = state.sessions.get(session_id)
        if runtime is None:
            await ws.close(code=4404, reason=f"no session {session_id}")
            return
        await ws.accept()
        snapshot, cursor = runtime.snapshot()
        try:
            await ws.send_text(json.dumps(snapshot))
            if runtime.terminal():
                await ws.close()
                return
            while True:
                fresh, terminal = await run_in_threadpool(runtime.wait_events, cursor, 1.0)
                for event in fresh:
                    await ws.send_text(json.dumps(event))
                cursor += len(fresh)
                if terminal and not fresh:
                    break
            await ws.close()
        except (WebSocketDisconnect, RuntimeError):
            return

    # ---- models & training ----
    @app.get("/api/models")
    def list_models():
        return state.list_models()

    @app.post("/api/train", status_code=202)
    def submit_train(req: TrainRequest):
        if not os.path.isfile(req.dataset):
            raise _err(422, "bad-dataset", f"dataset not readable: {req.dataset}")
        try:
            cfg = TrainConfig(**req.config)
        except (TypeError, ValueError) as e:
            raise _err(422, "bad-config", str(e))
        job_id = f"j-{uuid.uuid4().hex[:12]}"
        job = {"id": job_id, "dataset": req.dataset, "status": "PENDING", "model_id": None, "error": None}
        state.jobs[job_id] = job

        def work():
            job["status"] = "RUNNING"
            try:
                ds = load_dataset(job["dataset"])
                if req.clean:
                    ds, _ = clean_dataset(ds, IqrConfig())
                forest = train(ds, cfg)
                model_id = f"m-{uuid.uuid4().hex[:12]}"
                save_forest(forest, state.model_path(model_id))
                state.save_model_variance(model_id, variance_table(ds))
                job["model_id"] = model_id
                job["status"] = "DONE"
            except Exception as e:
                job["error"] = f"{type(e).__name__}: {e}"
                job["status"] = "FAILED"

        state.train_pool.submit(work)
        return job

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise _err(404, "job-not-found", f"no job {job_id}")
        return job

    if console_dir is None:
        console_dir = os.environ.get("CONSOLE_DIR")
    if console_dir and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
