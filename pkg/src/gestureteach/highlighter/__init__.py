from .estimator import INPUT_CHANNELS, HighlightSegmenter, predict_highlight
from .inputs import prepare_input
from .pipeline import train_highlighter
from .schedule import HighlighterTrainConfig, lr_at_epoch

__all__ = [
    "INPUT_CHANNELS",
    "HighlightSegmenter",
    "HighlighterTrainConfig",
    "lr_at_epoch",
    "predict_highlight",
    "prepare_input",
    "train_highlighter",
]
