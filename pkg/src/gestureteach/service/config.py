"""Server configuration, loadable from a JSON or YAML file.

The file uses nested sections matching the dotted key names, e.g.::

    handseg:
      backend: oracle
      model_path: fixtures/hands
    highlighter:
      model: runs/highlighter
    blend: {lambda: 0.718}
    loss: {lambda: 1.0}
    capture: {width: 640, height: 480}
    stream: {max_fps: 24}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError


@dataclass
class TrainDefaults:
    encoder: str = "tiny-cnn"
    epochs: int = 50
    batch_size: int = 4
    lr: float = 1e-4
    pretrained_encoder: bool = False
    input_size: tuple[int, int] | None = None
    seed: int = 0


@dataclass
class ServeConfig:
    handseg_backend: str = "constant"
    handseg_model_path: str | None = None
    highlighter_model: str | None = None
    blend_lambda: float = 0.718
    loss_lambda: float = 1.0
    capture_width: int = 640
    capture_height: int = 480
    stream_max_fps: int = 24
    sessions_root: str = "sessions"
    ui_static_dir: str | None = None
    train: TrainDefaults = field(default_factory=TrainDefaults)

    def __post_init__(self):
        if not 0.0 <= self.blend_lambda <= 1.0:
            raise ConfigError(f"blend.lambda must lie in [0, 1], got {self.blend_lambda}")
        if self.loss_lambda < 0.0:
            raise ConfigError(f"loss.lambda must be >= 0, got {self.loss_lambda}")
        if self.stream_max_fps <= 0:
            raise ConfigError("stream.max_fps must be positive")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServeConfig":
        path = Path(path)
        text = path.read_text()
        if path.suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ServeConfig":
        handseg = data.get("handseg", {})
        train = data.get("train", {})
        size = train.get("input_size")
        return cls(
            handseg_backend=handseg.get("backend", "constant"),
            handseg_model_path=handseg.get("model_path"),
            highlighter_model=data.get("highlighter", {}).get("model"),
            blend_lambda=data.get("blend", {}).get("lambda", 0.718),
            loss_lambda=data.get("loss", {}).get("lambda", 1.0),
            capture_width=data.get("capture", {}).get("width", 640),
            capture_height=data.get("capture", {}).get("height", 480),
            stream_max_fps=data.get("stream", {}).get("max_fps", 24),
            sessions_root=data.get("sessions", {}).get("root", "sessions"),
            ui_static_dir=data.get("ui", {}).get("static_dir"),
            train=TrainDefaults(
                encoder=train.get("encoder", "tiny-cnn"),
                epochs=train.get("epochs", 50),
                batch_size=train.get("batch_size", 4),
                lr=train.get("lr", 1e-4),
                pretrained_encoder=train.get("pretrained_encoder", False),
                input_size=tuple(size) if size else None,
                seed=train.get("seed", 0),
            ),
        )

    def to_public_dict(self) -> dict:
        return {
            "handseg": {"backend": self.handseg_backend},
            "blend": {"lambda": self.blend_lambda},
            "loss": {"lambda": self.loss_lambda},
            "capture": {"width": self.capture_width, "height": self.capture_height},
            "stream": {"max_fps": self.stream_max_fps},
        }
