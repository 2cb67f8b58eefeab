"""Cross-condition validation: score a taught model on samples captured
under a different teaching condition, mapping classes by label."""

from __future__ import annotations

from ..errors import MappingError
from .metrics import classification_accuracy


def cross_condition_eval(model, foreign_samples, foreign_classes=None) -> float:
    """Classification accuracy of `model` on foreign teaching samples.

    When `foreign_classes` (ClassDef list for the foreign session) is given,
    foreign class ids are mapped onto the model's classes by label; labels
    the model does not know raise a MappingError listing them. Without it,
    sample class ids must already be valid model class ids.
    """
    model_labels = {d.label: d.class_id for d in model.class_defs_}
    if foreign_classes is not None:
        unmatched = sorted(
            {c.label for c in foreign_classes} - set(model_labels)
        )
        if unmatched:
            raise MappingError(
                f"foreign class labels not known to the model: {unmatched}"
            )
        id_map = {c.class_id: model_labels[c.label] for c in foreign_classes}
    else:
        id_map = {d.class_id: d.class_id for d in model.class_defs_}

    bad_ids = sorted({s.class_id for s in foreign_samples} - set(id_map))
    if bad_ids:
        raise MappingError(f"foreign sample class ids without a mapping: {bad_ids}")

    frames = [s.frame for s in foreign_samples]
    truth = [id_map[s.class_id] for s in foreign_samples]
    preds = [int(p) for p in model.predict(frames)]
    return classification_accuracy(preds, truth)
