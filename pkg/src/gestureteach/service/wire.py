"""Wire formats for the streaming channel.

Envelopes are JSON with a version tag (v: 1) validated against the shipped
JSON-schema file. Frames travel as base64 JPEG (quality 80); masks come
back as base64 single-channel PNG.
"""

from __future__ import annotations

import base64
import importlib.resources
import json
from functools import lru_cache

import jsonschema

from ..core import ImageFrame, SoftMask
from ..core.pngio import frame_from_jpeg_bytes, frame_to_jpeg_bytes, soft_to_png_bytes
from ..errors import ArgumentError

SCHEMA_VERSION = 1
JPEG_QUALITY = 80


@lru_cache(maxsize=1)
def message_schema() -> dict:
    ref = importlib.resources.files("gestureteach.service") / "schema/stream_messages.schema.json"
    return json.loads(ref.read_text())


@lru_cache(maxsize=1)
def _validator() -> jsonschema.Validator:
    schema = message_schema()
    return jsonschema.Draft7Validator(schema)


def validate_message(msg: dict) -> None:
    """Raise ArgumentError when a message violates schema v1."""
    errors = sorted(_validator().iter_errors(msg), key=lambda e: e.path)
    if errors:
        raise ArgumentError(f"message violates schema v1: {errors[0].message}")


def encode_frame(frame: ImageFrame) -> str:
    return base64.b64encode(frame_to_jpeg_bytes(frame, quality=JPEG_QUALITY)).decode()


def decode_frame(data_b64: str, source_id: str = "") -> ImageFrame:
    try:
        raw = base64.b64decode(data_b64, validate=True)
        return frame_from_jpeg_bytes(raw, source_id=source_id)
    except Exception as exc:
        raise ArgumentError(f"frame payload does not decode: {exc}") from exc


def encode_soft_mask(soft: SoftMask) -> str:
    return base64.b64encode(soft_to_png_bytes(soft)).decode()


def frame_message(seq: int, frame: ImageFrame, ts: float | None = None) -> dict:
    msg = {"v": SCHEMA_VERSION, "type": "frame", "seq": seq, "data": encode_frame(frame)}
    if ts is not None:
        msg["ts"] = ts
    return msg


def capture_message() -> dict:
    return {"v": SCHEMA_VERSION, "type": "capture"}


def highlight_message(seq: int, soft: SoftMask, latency_ms: float, drops: int) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "type": "highlight",
        "seq": seq,
        "mask": encode_soft_mask(soft),
        "latency_ms": latency_ms,
        "drops": drops,
    }


def prediction_message(
    seq: int,
    confidences,
    predicted_class: int,
    predicted_label: str,
    saliency: SoftMask,
    latency_ms: float,
    drops: int,
) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "type": "prediction",
        "seq": seq,
        "confidences": [float(c) for c in confidences],
        "predicted_class": predicted_class,
        "predicted_label": predicted_label,
        "saliency": encode_soft_mask(saliency),
        "latency_ms": latency_ms,
        "drops": drops,
    }


def captured_message(sample_id: str, class_id: int, sample_count: int) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "type": "captured",
        "sample_id": sample_id,
        "class_id": class_id,
        "sample_count": sample_count,
    }


def error_message(code: str, message: str) -> dict:
    return {"v": SCHEMA_VERSION, "type": "error", "code": code, "message": message}
