"""HTTP + websocket surface of the teaching service.

One highlighter model is loaded at server start and shared read-only across
sessions. Frame streaming is latest-wins: a frame arriving while the
previous one is still processing replaces it and bumps the drop counter, so
queues never grow.
"""

from __future__ import annotations

import asyncio
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    ArgumentError,
    ConfigError,
    ConflictError,
    DatasetError,
    GestureTeachError,
    NotFoundError,
    StateError,
)
from ..handseg import HandSegmentor, HandSegmentorConfig
from ..highlighter import HighlightSegmenter
from .config import ServeConfig
from .pipeline import FramePipeline
from .state import SessionManager
from .wire import (
    captured_message,
    decode_frame,
    error_message,
    message_schema,
    validate_message,
)


class AddClassRequest(BaseModel):
    label: str


class ActiveClassRequest(BaseModel):
    class_id: int


class ModeRequest(BaseModel):
    mode: str


class TrainRequest(BaseModel):
    loss_lambda: float | None = Field(default=None, alias="lambda")
    epochs: int | None = None
    seed: int | None = None

    model_config = {"populate_by_name": True}


def create_app(
    config: ServeConfig,
    highlighter: HighlightSegmenter | None = None,
    sessions_root: str | Path | None = None,
) -> FastAPI:
    if highlighter is None:
        if not config.highlighter_model:
            raise ConfigError("serve requires highlighter.model (a trained model dir)")
        highlighter = HighlightSegmenter.load(config.highlighter_model)

    hand_segmentor = HandSegmentor(
        HandSegmentorConfig(
            backend_id=config.handseg_backend, model_path=config.handseg_model_path
        )
    )
    manager = SessionManager(config, root=sessions_root)
    pipeline = FramePipeline(highlighter, hand_segmentor)

    app = FastAPI(title="gestureteach service")
    app.state.config = config
    app.state.manager = manager
    app.state.pipeline = pipeline

    @app.exception_handler(GestureTeachError)
    async def on_domain_error(_, exc: GestureTeachError):
        status = 400
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, (ConflictError, StateError)):
            status = 409
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    # ------------------------------------------------------------------
    @app.get("/config")
    def get_config():
        return config.to_public_dict()

    @app.get("/schema/stream")
    def get_schema():
        return message_schema()

    @app.post("/sessions", status_code=201)
    def create_session():
        return manager.create_session().view()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return manager.get(session_id).view()

    @app.post("/sessions/{session_id}/classes", status_code=201)
    def add_class(session_id: str, body: AddClassRequest):
        new = manager.add_class(session_id, body.label)
        return {"id": new.class_id, "label": new.label, "sample_count": new.sample_count}

    @app.post("/sessions/{session_id}/active-class")
    def set_active_class(session_id: str, body: ActiveClassRequest):
        manager.set_active_class(session_id, body.class_id)
        return manager.get(session_id).view()

    @app.post("/sessions/{session_id}/mode")
    def set_mode(session_id: str, body: ModeRequest):
        manager.set_mode(session_id, body.mode)
        return manager.get(session_id).view()

    @app.post("/sessions/{session_id}/train", status_code=202)
    def start_training(session_id: str, body: TrainRequest):
        job = manager.start_training(
            session_id, lam=body.loss_lambda, epochs=body.epochs, seed=body.seed
        )
        return job.snapshot()

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return manager.job(job_id).snapshot()

    # ------------------------------------------------------------------
    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        try:
            live = manager.get(session_id)
        except NotFoundError:
            await ws.close(code=4004)
            return
        await ws.accept()
        loop = asyncio.get_running_loop()
        cond = asyncio.Condition()
        slot: dict = {"frame": None, "stop": False}

        async def processor():
            while True:
                async with cond:
                    await cond.wait_for(lambda: slot["frame"] is not None or slot["stop"])
                    if slot["frame"] is None:
                        return
                    seq, frame = slot["frame"]
                    slot["frame"] = None
                try:
                    msg = await loop.run_in_executor(None, pipeline.process, live, seq, frame)
                except GestureTeachError as exc:
                    msg = error_message("inference", str(exc))
                if msg is not None:
                    try:
                        await ws.send_json(msg)
                    except Exception:
                        return  # client went away mid-send

        worker = asyncio.create_task(processor())
        try:
            while True:
                raw = await ws.receive_json()
                try:
                    validate_message(raw)
                except ArgumentError as exc:
                    await ws.send_json(error_message("protocol", str(exc)))
                    continue
                kind = raw["type"]
                if kind == "frame":
                    try:
                        frame = decode_frame(
                            raw["data"], source_id=f"{session_id}:{raw['seq']}"
                        )
                    except ArgumentError as exc:
                        await ws.send_json(error_message("protocol", str(exc)))
                        continue
                    async with cond:
                        if slot["frame"] is not None:
                            with live.lock:
                                live.drops += 1
                        slot["frame"] = (raw["seq"], frame)
                        cond.notify()
                elif kind == "capture":
                    try:
                        sample = await loop.run_in_executor(
                            None, manager.capture_sample, session_id
                        )
                        count = live.state.class_by_id(sample.class_id).sample_count
                        await ws.send_json(
                            captured_message(sample.sample_id, sample.class_id, count)
                        )
                    except GestureTeachError as exc:
                        await ws.send_json(error_message("state", str(exc)))
                else:
                    await ws.send_json(
                        error_message("protocol", f"client may not send {kind!r}")
                    )
        except WebSocketDisconnect:
            pass
        finally:
            async with cond:
                slot["stop"] = True
                cond.notify_all()
            await worker

    # ------------------------------------------------------------------
    ui_dir = config.ui_static_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
