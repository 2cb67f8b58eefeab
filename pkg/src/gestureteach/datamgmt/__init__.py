from .hutics import GESTURES, HuTicsLoadResult, HuTicsRecord, load_hutics
from .session_store import (
    DEFAULT_LAMBDA_BLEND,
    SessionState,
    TeachingSample,
    load_session,
    make_sample,
    quantize_soft,
    save_session,
)
from .split import DatasetSplit, split_by_participant

__all__ = [
    "DEFAULT_LAMBDA_BLEND",
    "GESTURES",
    "DatasetSplit",
    "HuTicsLoadResult",
    "HuTicsRecord",
    "SessionState",
    "TeachingSample",
    "load_hutics",
    "load_session",
    "make_sample",
    "quantize_soft",
    "save_session",
    "split_by_participant",
]
