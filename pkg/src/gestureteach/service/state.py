"""Session orchestration: event-sourced state, capture, and training jobs.

All mutations of one session are serialized behind its lock and appended to
the session's event log; replaying the log reconstructs the state exactly.
Training runs on a worker thread per job, isolated from frame processing,
and a session accepts at most one queued/running job at a time.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..core import ImageFrame, SoftMask
from ..core.pngio import frame_from_png_bytes, load_mask_png, load_soft_png
from ..datamgmt.session_store import (
    SessionState,
    TeachingSample,
    make_sample,
    sample_file_names,
    write_manifest,
    write_sample_files,
)
from ..errors import ConflictError, DatasetError, NotFoundError, StateError
from ..teachtrain import ClassDef, TaughtClassifier, UserTrainConfig, train_user_model
from .config import ServeConfig

MODES = ("teaching", "assessment")


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class TrainingJob:
    job_id: str
    session_id: str
    status: str = "queued"  # queued -> running -> done | failed
    progress: int = 0
    total_epochs: int = 0
    error: str | None = None
    result_dir: str | None = None

    def snapshot(self) -> dict:
        return {
            "job_id": self.job_id,
            "session_id": self.session_id,
            "status": self.status,
            "progress": self.progress,
            "total_epochs": self.total_epochs,
            "error": self.error,
            "result_dir": self.result_dir,
        }


class LiveSession:
    """A session's state plus its runtime bookkeeping."""

    def __init__(self, state: SessionState, directory: Path):
        self.state = state
        self.dir = directory
        self.lock = threading.RLock()
        self.mode_epoch = 0  # bumped on every mode switch; fences stale results
        self.drops = 0
        self.last_processed: tuple[ImageFrame, SoftMask] | None = None
        self.job_id: str | None = None
        self.user_model: TaughtClassifier | None = None

    def append_event(self, event: str, **payload) -> None:
        record = {"event": event, "at": _now_iso(), **payload}
        with (self.dir / "events.jsonl").open("a") as fh:
            fh.write(json.dumps(record) + "\n")

    def view(self) -> dict:
        with self.lock:
            return {
                "session_id": self.state.session_id,
                "mode": self.state.mode,
                "active_class": self.state.active_class,
                "lambda_blend": self.state.lambda_blend,
                "classes": [
                    {"id": c.class_id, "label": c.label, "sample_count": c.sample_count}
                    for c in self.state.classes
                ],
                "sample_total": len(self.state.samples),
                "trained": self.user_model is not None,
                "drops": self.drops,
                "job_id": self.job_id,
            }


class SessionManager:
    def __init__(self, config: ServeConfig, root: Path | None = None):
        self.config = config
        self.root = Path(root if root is not None else config.sessions_root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, LiveSession] = {}
        self._jobs: dict[str, TrainingJob] = {}
        self._registry_lock = threading.Lock()

    # ------------------------------------------------------------------
    def create_session(self) -> LiveSession:
        session_id = uuid.uuid4().hex[:12]
        directory = self.root / session_id
        directory.mkdir(parents=True)
        state = SessionState(session_id=session_id, lambda_blend=self.config.blend_lambda)
        live = LiveSession(state, directory)
        with self._registry_lock:
            self._sessions[session_id] = live
        live.append_event(
            "session_created", session_id=session_id, lambda_blend=state.lambda_blend
        )
        write_manifest(state, directory)
        return live

    def get(self, session_id: str) -> LiveSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise NotFoundError(f"unknown session {session_id!r}")

    def job(self, job_id: str) -> TrainingJob:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise NotFoundError(f"unknown job {job_id!r}")

    # ------------------------------------------------------------------
    def add_class(self, session_id: str, label: str) -> ClassDef:
        live = self.get(session_id)
        with live.lock:
            if any(c.label == label for c in live.state.classes):
                raise ConflictError(f"class label {label!r} already exists")
            new = ClassDef(class_id=len(live.state.classes), label=label)
            live.state.classes.append(new)
            if live.state.active_class is None:
                live.state.active_class = new.class_id
            live.append_event("class_added", class_id=new.class_id, label=label)
            write_manifest(live.state, live.dir)
            return new

    def set_active_class(self, session_id: str, class_id: int) -> None:
        live = self.get(session_id)
        with live.lock:
            live.state.class_by_id(class_id)
            live.state.active_class = class_id
            live.append_event("active_class_set", class_id=class_id)
            write_manifest(live.state, live.dir)

    def set_mode(self, session_id: str, mode: str) -> None:
        live = self.get(session_id)
        if mode not in MODES:
            raise StateError(f"unknown mode {mode!r}")
        with live.lock:
            if mode == "assessment" and live.user_model is None:
                raise StateError("assessment mode requires a trained model")
            live.state.mode = mode
            live.mode_epoch += 1
            live.append_event("mode_set", mode=mode)
            write_manifest(live.state, live.dir)

    # ------------------------------------------------------------------
    def capture_sample(self, session_id: str) -> TeachingSample:
        """Persist the most recent processed frame + mask, then acknowledge."""
        live = self.get(session_id)
        with live.lock:
            if live.state.mode != "teaching":
                raise StateError("capture is only available in teaching mode")
            if live.state.active_class is None:
                raise StateError("no active class to capture into")
            if live.last_processed is None:
                raise StateError("no processed frame available to capture")
            frame, soft = live.last_processed
            sample = make_sample(
                sample_id=uuid.uuid4().hex[:12],
                class_id=live.state.active_class,
                frame=frame,
                soft=soft,
                captured_at=_now_iso(),
                session_id=live.state.session_id,
            )
            write_sample_files(sample, live.dir)
            live.state.samples.append(sample)
            live.state.recount()
            live.append_event(
                "sample_captured",
                sample_id=sample.sample_id,
                class_id=sample.class_id,
                captured_at=sample.captured_at,
            )
            write_manifest(live.state, live.dir)
            return sample

    # ------------------------------------------------------------------
    def start_training(
        self,
        session_id: str,
        lam: float | None = None,
        epochs: int | None = None,
        seed: int | None = None,
    ) -> TrainingJob:
        live = self.get(session_id)
        with live.lock:
            if live.job_id is not None:
                job = self._jobs[live.job_id]
                if job.status in ("queued", "running"):
                    raise ConflictError(f"training job {job.job_id} already active")
            nonempty = [c for c in live.state.classes if c.sample_count > 0]
            if len(nonempty) < 2:
                raise DatasetError(
                    "training needs at least 2 classes with at least 1 sample each"
                )
            defaults = self.config.train
            job = TrainingJob(
                job_id=uuid.uuid4().hex[:12],
                session_id=session_id,
                total_epochs=epochs if epochs is not None else defaults.epochs,
            )
            self._jobs[job.job_id] = job
            live.job_id = job.job_id
            samples = list(live.state.samples)
            labels = [c.label for c in live.state.classes]

        lam_val = self.config.loss_lambda if lam is None else lam
        thread = threading.Thread(
            target=self._run_training,
            args=(live, job, samples, labels, lam_val, epochs, seed),
            daemon=True,
        )
        thread.start()
        return job

    def _run_training(self, live, job, samples, labels, lam, epochs, seed):
        defaults = self.config.train
        job.status = "running"
        try:
            config = UserTrainConfig(
                epochs=epochs if epochs is not None else defaults.epochs,
                batch_size=defaults.batch_size,
                lr=defaults.lr,
                pretrained_encoder=defaults.pretrained_encoder,
                seed=seed if seed is not None else defaults.seed,
            )

            def on_epoch(epoch_index: int) -> None:
                job.progress = epoch_index + 1

            model = train_user_model(
                samples,
                config,
                lam=lam,
                encoder=defaults.encoder,
                class_labels=labels,
                lambda_blend=self.config.blend_lambda,
                input_size=defaults.input_size,
                epoch_callback=on_epoch,
            )
            out_dir = live.dir / "model"
            model.save(out_dir, metrics={"final_loss": model.loss_history_[-1]})
            with live.lock:
                live.user_model = model
                live.state.user_model_dir = str(out_dir)
                live.append_event("model_trained", model_dir=str(out_dir))
                write_manifest(live.state, live.dir)
            job.result_dir = str(out_dir)
            job.status = "done"
        except Exception as exc:  # surfaced through job status
            job.error = f"{type(exc).__name__}: {exc}"
            job.status = "failed"

    def wait_for_job(self, job_id: str, timeout: float = 600.0) -> TrainingJob:
        job = self.job(job_id)
        deadline = time.monotonic() + timeout
        while job.status in ("queued", "running"):
            if time.monotonic() > deadline:
                raise TimeoutError(f"job {job_id} still {job.status} after {timeout}s")
            time.sleep(0.05)
        return job


# ---------------------------------------------------------------------------
# event replay

def replay_events(session_dir: str | Path) -> SessionState:
    """Reconstruct a SessionState purely from the event log + sample files."""
    session_dir = Path(session_dir)
    events_path = session_dir / "events.jsonl"
    if not events_path.exists():
        raise NotFoundError(f"no event log in {session_dir}")
    state: SessionState | None = None
    for line in events_path.read_text().splitlines():
        record = json.loads(line)
        kind = record["event"]
        if kind == "session_created":
            state = SessionState(
                session_id=record["session_id"], lambda_blend=record["lambda_blend"]
            )
        elif state is None:
            raise StateError("event log does not start with session_created")
        elif kind == "class_added":
            state.classes.append(ClassDef(record["class_id"], record["label"]))
            if state.active_class is None:
                state.active_class = record["class_id"]
        elif kind == "active_class_set":
            state.active_class = record["class_id"]
        elif kind == "mode_set":
            state.mode = record["mode"]
        elif kind == "sample_captured":
            frame_rel, soft_rel, bin_rel = sample_file_names(record["sample_id"])
            frame = frame_from_png_bytes(
                (session_dir / frame_rel).read_bytes(), source_id=record["sample_id"]
            )
            state.samples.append(
                TeachingSample(
                    sample_id=record["sample_id"],
                    class_id=record["class_id"],
                    frame=frame,
                    highlight_soft=load_soft_png(session_dir / soft_rel),
                    highlight_bin=load_mask_png(session_dir / bin_rel),
                    captured_at=record["captured_at"],
                    session_id=state.session_id,
                )
            )
        elif kind == "model_trained":
            state.user_model_dir = record["model_dir"]
    if state is None:
        raise StateError("empty event log")
    state.recount()
    return state
