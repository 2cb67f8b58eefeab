from .app import create_app
from .config import ServeConfig, TrainDefaults
from .pipeline import FramePipeline
from .state import LiveSession, SessionManager, TrainingJob, replay_events
from .wire import message_schema, validate_message

__all__ = [
    "FramePipeline",
    "LiveSession",
    "ServeConfig",
    "SessionManager",
    "TrainDefaults",
    "TrainingJob",
    "create_app",
    "message_schema",
    "replay_events",
    "validate_message",
]
