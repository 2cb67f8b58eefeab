from .benchmark import ArchComparison, benchmark_fps, compare_architectures
from .crosscond import cross_condition_eval
from .metrics import EvalReport, classification_accuracy, iou, miou

__all__ = [
    "ArchComparison",
    "EvalReport",
    "benchmark_fps",
    "classification_accuracy",
    "compare_architectures",
    "cross_condition_eval",
    "iou",
    "miou",
]
