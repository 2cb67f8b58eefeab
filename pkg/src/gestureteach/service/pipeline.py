"""Per-frame processing shared by the websocket loop and tests.

Results are fenced against mode switches: a frame that started processing
under one mode never produces a message after the session's mode epoch has
moved on (the frame is counted as dropped instead).
"""

from __future__ import annotations

import time

from ..core import ImageFrame
from ..handseg import HandSegmentor
from ..highlighter import HighlightSegmenter
from .state import LiveSession
from .wire import highlight_message, prediction_message


class FramePipeline:
    def __init__(self, highlighter: HighlightSegmenter, hand_segmentor: HandSegmentor):
        self.highlighter = highlighter
        self.hand_segmentor = hand_segmentor

    def process(self, live: LiveSession, seq: int, frame: ImageFrame) -> dict | None:
        """Produce a highlight or prediction message, or None when fenced."""
        t0 = time.perf_counter()
        with live.lock:
            epoch = live.mode_epoch
            mode = live.state.mode
            lam = live.state.lambda_blend
            model = live.user_model

        if mode == "teaching":
            hand = self.hand_segmentor.hand_mask(frame)
            soft = self.highlighter.predict_one(frame, hand)
            latency_ms = (time.perf_counter() - t0) * 1000.0
            with live.lock:
                if live.mode_epoch != epoch:
                    live.drops += 1
                    return None
                live.last_processed = (frame, soft)
                return highlight_message(seq, soft, latency_ms, live.drops)

        result = model.predict_result(frame, lambda_blend=lam)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        with live.lock:
            if live.mode_epoch != epoch:
                live.drops += 1
                return None
            label = live.state.class_by_id(result.predicted_class).label
            return prediction_message(
                seq,
                result.confidences,
                result.predicted_class,
                label,
                result.saliency,
                latency_ms,
                live.drops,
            )
