import numpy as np
import pytest
from scipy.special import softmax

from gestureteach.core import ImageFrame, SoftMask
from gestureteach.datamgmt import make_sample
from gestureteach.datamgmt.synthetic import single_object_scene
from gestureteach.errors import (
    ArgumentError,
    DatasetError,
    MappingError,
    RecordValidationError,
    StateError,
)
from gestureteach.evalbench import classification_accuracy, cross_condition_eval
from gestureteach.teachtrain import (
    PredictionResult,
    TaughtClassifier,
    UserTrainConfig,
    predict,
    train_user_model,
)


def make_set(seed=0, per_class=4):
    rng = np.random.default_rng(seed)
    frames, labels, masks = [], [], []
    for i in range(per_class):
        f, m = single_object_scene(rng, "circle", source_id=f"c{i}")
        frames.append(f), labels.append(0), masks.append(m)
    for i in range(per_class):
        f, m = single_object_scene(rng, "square", source_id=f"s{i}")
        frames.append(f), labels.append(1), masks.append(m)
    return frames, labels, masks


@pytest.fixture(scope="module")
def fitted():
    frames, labels, masks = make_set()
    model = TaughtClassifier(
        encoder="tiny-cnn", epochs=25, batch_size=4, lambda_loss=1.0,
        pretrained_encoder=False, seed=0,
    )
    model.fit(frames, labels, masks=masks, class_labels=["circle", "square"])
    return model, frames, labels, masks


def test_softmax_example_values():
    conf = softmax(np.array([2.0, 0.0, 0.0]))
    assert conf[0] == pytest.approx(0.78699, abs=1e-5)
    assert conf[1] == pytest.approx(0.10651, abs=1e-5)
    assert conf[2] == pytest.approx(0.10651, abs=1e-5)


def test_equal_logits_tie_breaks_to_lowest_class():
    conf = softmax(np.zeros(3))
    result = PredictionResult(
        confidences=conf,
        predicted_class=0,
        saliency=SoftMask(np.zeros((2, 2))),
        cam=SoftMask(np.zeros((2, 2))),
    )
    assert result.predicted_class == 0
    assert np.allclose(result.confidences, 1 / 3)


def test_prediction_result_validates_sum_and_argmax():
    sal = SoftMask(np.zeros((2, 2)))
    with pytest.raises(ArgumentError):
        PredictionResult(np.array([0.5, 0.4]), 0, sal, sal)
    with pytest.raises(ArgumentError):
        PredictionResult(np.array([0.2, 0.8]), 0, sal, sal)


def test_fit_requires_two_classes():
    frames, _, masks = make_set(per_class=3)
    model = TaughtClassifier(encoder="tiny-cnn", epochs=2, pretrained_encoder=False)
    with pytest.raises(DatasetError):
        model.fit(frames[:3], [0, 0, 0], masks=masks[:3])


def test_fit_names_sample_missing_mask():
    frames, labels, masks = make_set(per_class=2)
    masks = list(masks)
    masks[2] = None
    model = TaughtClassifier(encoder="tiny-cnn", epochs=2, lambda_loss=1.0,
                             pretrained_encoder=False)
    with pytest.raises(RecordValidationError, match="s0"):
        model.fit(frames, labels, masks=masks)


def test_classifier_only_falls_back_to_cam():
    frames, labels, _ = make_set(per_class=2)
    model = TaughtClassifier(
        encoder="tiny-cnn", with_seg_decoder=False, epochs=4,
        lambda_loss=0.0, pretrained_encoder=False, seed=1,
    )
    model.fit(frames, labels)
    result = model.predict_result(frames[0])
    assert result.seg_output is None
    assert result.saliency == result.cam


def test_predict_result_invariants(fitted):
    model, frames, labels, _ = fitted
    result = predict(model, frames[0])
    assert abs(result.confidences.sum() - 1.0) < 1e-6
    assert result.predicted_class == int(np.argmax(result.confidences))
    assert result.seg_output is not None
    assert result.saliency.shape == frames[0].shape
    assert result.cam.shape == frames[0].shape


def test_lambda_blend_never_changes_predicted_class(fitted):
    model, frames, _, _ = fitted
    for lam in (0.0, 0.3, 0.718, 1.0):
        r = model.predict_result(frames[1], lambda_blend=lam)
        assert r.predicted_class == model.predict_result(frames[1]).predicted_class


def test_overfit_train_accuracy(fitted):
    model, frames, labels, _ = fitted
    preds = model.predict(frames)
    assert (preds == np.asarray(labels)).mean() == 1.0


def test_cam_validates_class_id(fitted):
    model, frames, _, _ = fitted
    with pytest.raises(ArgumentError):
        model.compute_cam(frames[0], 99)


def test_unfitted_raises_state_error():
    model = TaughtClassifier(encoder="tiny-cnn")
    with pytest.raises(StateError):
        model.predict_result(ImageFrame(np.zeros((8, 8, 3), dtype=np.uint8)))


def test_save_load_round_trip(fitted, tmp_path):
    model, frames, _, _ = fitted
    model.save(tmp_path, metrics={"train_accuracy": 1.0})
    for name in ("weights.bin", "classes.json", "train_config.json", "metrics.json"):
        assert (tmp_path / name).exists()
    again = TaughtClassifier.load(tmp_path)
    assert [d.label for d in again.class_defs_] == ["circle", "square"]
    a = model.predict_proba(frames[:3])
    b = again.predict_proba(frames[:3])
    assert np.allclose(a, b, atol=1e-7)


def test_train_user_model_wrapper_on_samples():
    frames, labels, masks = make_set(seed=3, per_class=3)
    samples = [
        make_sample(f"t{i}", labels[i], frames[i], SoftMask(masks[i].values.astype(np.float32)),
                    "2026-08-09T00:00:00+00:00", "sess")
        for i in range(len(frames))
    ]
    config = UserTrainConfig(epochs=3, batch_size=4, pretrained_encoder=False, seed=0)
    model = train_user_model(samples, config, lam=1.0, encoder="tiny-cnn",
                             class_labels=["circle", "square"])
    assert model.has_seg_decoder
    assert len(model.class_defs_) == 2
    assert len(model.loss_history_) > 0


# ---------------------------------------------------------------------------
# cross-condition evaluation

def as_samples(frames, labels):
    return [
        make_sample(
            f"x{i}", labels[i], frames[i],
            SoftMask(np.zeros(frames[i].shape, dtype=np.float32)),
            "2026-08-09T00:00:00+00:00", "foreign",
        )
        for i in range(len(frames))
    ]


def test_cross_condition_equals_accuracy_on_same_set(fitted):
    model, frames, labels, _ = fitted
    samples = as_samples(frames, labels)
    acc = cross_condition_eval(model, samples)
    preds = [int(p) for p in model.predict(frames)]
    assert acc == classification_accuracy(preds, labels)


def test_cross_condition_maps_permuted_labels(fitted):
    from gestureteach.teachtrain import ClassDef

    model, frames, labels, _ = fitted
    flipped = [1 - v for v in labels]
    samples = as_samples(frames, flipped)
    foreign_classes = [ClassDef(0, "square"), ClassDef(1, "circle")]
    acc = cross_condition_eval(model, samples, foreign_classes)
    preds = [int(p) for p in model.predict(frames)]
    assert acc == classification_accuracy(preds, labels)


def test_cross_condition_unknown_labels_raise(fitted):
    from gestureteach.teachtrain import ClassDef

    model, frames, labels, _ = fitted
    samples = as_samples(frames, labels)
    foreign_classes = [ClassDef(0, "circle"), ClassDef(1, "banana")]
    with pytest.raises(MappingError, match="banana"):
        cross_condition_eval(model, samples, foreign_classes)


def test_cross_condition_unmapped_ids_raise(fitted):
    model, frames, labels, _ = fitted
    samples = as_samples(frames, [v + 5 for v in labels])
    with pytest.raises(MappingError):
        cross_condition_eval(model, samples)
