"""Class definitions shared by sessions and the user-taught model."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ArgumentError


@dataclass(frozen=True)
class ClassDef:
    class_id: int
    label: str
    sample_count: int = 0

    def __post_init__(self):
        if self.class_id < 0:
            raise ArgumentError(f"class_id must be >= 0, got {self.class_id}")
        if not self.label:
            raise ArgumentError("class label must be nonempty")
        if self.sample_count < 0:
            raise ArgumentError("sample_count must be >= 0")


def check_class_list(classes: list[ClassDef]) -> None:
    """Enforce contiguous ids from 0 and unique labels."""
    ids = [c.class_id for c in classes]
    if ids != list(range(len(classes))):
        raise ArgumentError(f"class ids must be contiguous from 0, got {ids}")
    labels = [c.label for c in classes]
    if len(set(labels)) != len(labels):
        raise ArgumentError(f"class labels must be unique, got {labels}")
