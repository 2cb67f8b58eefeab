from .blend import blend_saliency
from .cam import cam_from_features, normalize_minmax
from .classes import ClassDef, check_class_list
from .estimator import (
    DEFAULT_LAMBDA_BLEND,
    PredictionResult,
    TaughtClassifier,
    UserModel,
    UserNet,
    UserTrainConfig,
    compute_cam,
    predict,
    train_user_model,
)
from .losses import JointCriterion, joint_loss, joint_loss_grad, seg_bce

__all__ = [
    "DEFAULT_LAMBDA_BLEND",
    "ClassDef",
    "JointCriterion",
    "PredictionResult",
    "TaughtClassifier",
    "UserModel",
    "UserNet",
    "UserTrainConfig",
    "blend_saliency",
    "cam_from_features",
    "check_class_list",
    "compute_cam",
    "joint_loss",
    "joint_loss_grad",
    "normalize_minmax",
    "predict",
    "seg_bce",
    "train_user_model",
]
