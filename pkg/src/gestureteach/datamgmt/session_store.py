"""Teaching-session state and its on-disk persistence.

A session directory holds a `session.json` manifest, per-sample PNGs under
`samples/`, and an append-only `events.jsonl` written by the live service.
Saves are atomic (write to a temp name, then rename) and round-trip
bit-exactly: the captured soft masks are stored 8-bit quantized, which is
exactly how `capture` creates them in the first place.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..core import BinaryMask, ImageFrame, SoftMask, binarize
from ..core.pngio import (
    frame_from_png_bytes,
    frame_to_png_bytes,
    load_mask_png,
    load_soft_png,
    save_mask_png,
    save_soft_png,
)
from ..errors import SessionFormatError, ShapeError
from ..teachtrain.classes import ClassDef, check_class_list

MANIFEST_NAME = "session.json"
DEFAULT_LAMBDA_BLEND = 0.718


def quantize_soft(soft: SoftMask) -> SoftMask:
    """Snap a soft mask to the 8-bit grid used by PNG serialization.

    The float32 division mirrors the PNG loading path exactly, so values
    survive a save/load cycle bit-identically.
    """
    levels = np.floor(soft.values.astype(np.float64) * 255.0 + 0.5)
    return SoftMask(levels.astype(np.float32) / 255.0)


@dataclass(frozen=True, eq=False)
class TeachingSample:
    sample_id: str
    class_id: int
    frame: ImageFrame
    highlight_soft: SoftMask
    highlight_bin: BinaryMask
    captured_at: str
    session_id: str

    def __post_init__(self):
        if self.frame.shape != self.highlight_soft.shape:
            raise ShapeError("sample mask shape differs from frame shape")
        if self.frame.shape != self.highlight_bin.shape:
            raise ShapeError("sample mask shape differs from frame shape")
        if self.highlight_bin != binarize(self.highlight_soft, 0.5):
            raise ShapeError("highlight_bin must equal binarize(highlight_soft, 0.5)")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TeachingSample):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.class_id == other.class_id
            and self.captured_at == other.captured_at
            and self.session_id == other.session_id
            and self.frame == other.frame
            and self.highlight_soft == other.highlight_soft
            and self.highlight_bin == other.highlight_bin
        )


def make_sample(
    sample_id: str,
    class_id: int,
    frame: ImageFrame,
    soft: SoftMask,
    captured_at: str,
    session_id: str,
) -> TeachingSample:
    """Quantize the inferred mask, derive its binarization, and re-tag the
    frame with the sample id (its identity from here on)."""
    q = quantize_soft(soft)
    return TeachingSample(
        sample_id=sample_id,
        class_id=class_id,
        frame=ImageFrame(frame.pixels, source_id=sample_id),
        highlight_soft=q,
        highlight_bin=binarize(q, 0.5),
        captured_at=captured_at,
        session_id=session_id,
    )


@dataclass(eq=False)
class SessionState:
    session_id: str
    mode: str = "teaching"
    classes: list[ClassDef] = field(default_factory=list)
    samples: list[TeachingSample] = field(default_factory=list)
    active_class: int | None = None
    lambda_blend: float = DEFAULT_LAMBDA_BLEND
    user_model_dir: str | None = None

    def class_by_id(self, class_id: int) -> ClassDef:
        for c in self.classes:
            if c.class_id == class_id:
                return c
        raise KeyError(class_id)

    def recount(self) -> None:
        """Recompute per-class sample counts from the stored samples."""
        counts = {c.class_id: 0 for c in self.classes}
        for s in self.samples:
            counts[s.class_id] = counts.get(s.class_id, 0) + 1
        self.classes = [replace(c, sample_count=counts.get(c.class_id, 0)) for c in self.classes]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SessionState):
            return NotImplemented
        return (
            self.session_id == other.session_id
            and self.mode == other.mode
            and self.classes == other.classes
            and self.active_class == other.active_class
            and abs(self.lambda_blend - other.lambda_blend) < 1e-12
            and self.user_model_dir == other.user_model_dir
            and self.samples == other.samples
        )


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def sample_file_names(sample_id: str) -> tuple[str, str, str]:
    return (
        f"samples/{sample_id}.frame.png",
        f"samples/{sample_id}.soft.png",
        f"samples/{sample_id}.bin.png",
    )


def write_sample_files(sample: TeachingSample, root: Path) -> dict:
    """Write one sample's PNGs; returns its manifest entry."""
    frame_rel, soft_rel, bin_rel = sample_file_names(sample.sample_id)
    (root / "samples").mkdir(parents=True, exist_ok=True)
    _atomic_write(root / frame_rel, frame_to_png_bytes(sample.frame))
    save_soft_png(sample.highlight_soft, root / soft_rel)
    save_mask_png(sample.highlight_bin, root / bin_rel)
    return {
        "id": sample.sample_id,
        "class_id": sample.class_id,
        "frame": frame_rel,
        "mask_soft": soft_rel,
        "mask_bin": bin_rel,
        "captured_at": sample.captured_at,
    }


def write_manifest(session: SessionState, root: Path) -> None:
    manifest = {
        "session_id": session.session_id,
        "mode": session.mode,
        "active_class": session.active_class,
        "lambda_blend": session.lambda_blend,
        "user_model_dir": session.user_model_dir,
        "classes": [{"id": c.class_id, "label": c.label} for c in session.classes],
        "samples": [
            dict(
                zip(
                    ("frame", "mask_soft", "mask_bin"),
                    sample_file_names(s.sample_id),
                )
            )
            | {"id": s.sample_id, "class_id": s.class_id, "captured_at": s.captured_at}
            for s in session.samples
        ],
    }
    _atomic_write(root / MANIFEST_NAME, json.dumps(manifest, indent=2).encode())


def save_session(session: SessionState, root: str | Path) -> Path:
    """Persist a session; returns the directory written."""
    root = Path(root)
    (root / "samples").mkdir(parents=True, exist_ok=True)
    for s in session.samples:
        write_sample_files(s, root)
    write_manifest(session, root)
    return root


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise SessionFormatError(f"manifest field {where}.{key} is missing")
    return d[key]


def load_session(root: str | Path) -> SessionState:
    """Load a persisted session; errors name the corrupt manifest field."""
    root = Path(root)
    path = root / MANIFEST_NAME
    if not path.exists():
        raise SessionFormatError(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"{MANIFEST_NAME} is not valid JSON: {exc}")

    session_id = _need(manifest, "session_id", "session")
    classes = []
    for i, c in enumerate(_need(manifest, "classes", "session")):
        classes.append(
            ClassDef(
                class_id=_need(c, "id", f"classes[{i}]"),
                label=_need(c, "label", f"classes[{i}]"),
            )
        )
    check_class_list(classes)

    samples = []
    for i, s in enumerate(_need(manifest, "samples", "session")):
        where = f"samples[{i}]"
        frame_rel = _need(s, "frame", where)
        frame_path = root / frame_rel
        if not frame_path.exists():
            raise SessionFormatError(f"{where}.frame points to missing file {frame_path}")
        sample_id = _need(s, "id", where)
        frame = frame_from_png_bytes(frame_path.read_bytes(), source_id=sample_id)
        soft = load_soft_png(root / _need(s, "mask_soft", where))
        bin_mask = load_mask_png(root / _need(s, "mask_bin", where))
        samples.append(
            TeachingSample(
                sample_id=sample_id,
                class_id=_need(s, "class_id", where),
                frame=frame,
                highlight_soft=soft,
                highlight_bin=bin_mask,
                captured_at=_need(s, "captured_at", where),
                session_id=session_id,
            )
        )

    state = SessionState(
        session_id=session_id,
        mode=manifest.get("mode", "teaching"),
        classes=classes,
        samples=samples,
        active_class=manifest.get("active_class"),
        lambda_blend=manifest.get("lambda_blend", DEFAULT_LAMBDA_BLEND),
        user_model_dir=manifest.get("user_model_dir"),
    )
    state.recount()
    return state
