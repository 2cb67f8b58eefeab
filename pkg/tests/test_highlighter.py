import numpy as np
import pytest
import torch

from gestureteach.core import BinaryMask, ImageFrame, binarize
from gestureteach.datamgmt import load_hutics, split_by_participant
from gestureteach.datamgmt.synthetic import make_highlight_dataset, write_hutics_corpus
from gestureteach.errors import ArgumentError, ConfigError, DatasetError, ShapeError, StateError
from gestureteach.handseg import HandSegmentorConfig
from gestureteach.highlighter import (
    HighlighterTrainConfig,
    HighlightSegmenter,
    predict_highlight,
    prepare_input,
    train_highlighter,
)
from gestureteach.models import EncoderDecoderNet


@pytest.fixture(scope="module")
def tiny_data():
    data = make_highlight_dataset(n=8, seed=5)
    X = [(f, h) for f, h, gt, _ in data]
    y = [gt for _, _, gt, _ in data]
    return X, y


@pytest.fixture(scope="module")
def quick_model(tiny_data):
    X, y = tiny_data
    model = HighlightSegmenter(
        backbone="tiny-cnn", decoder="unet", epochs=10, batch_size=4,
        lr_hold_head=2, lr_hold_tail=2, seed=0,
    )
    return model.fit(X, y)


# ---------------------------------------------------------------------------
# prepare_input

def test_prepare_input_zero_everything():
    frame = ImageFrame(np.zeros((4, 6, 3), dtype=np.uint8))
    hand = BinaryMask(np.zeros((4, 6), dtype=np.uint8))
    x = prepare_input(frame, hand)
    assert x.shape == (4, 4, 6)
    assert (x == 0).all()


def test_prepare_input_scaling():
    px = np.zeros((1, 2, 3), dtype=np.uint8)
    px[0, 0] = 255
    px[0, 1] = 128
    frame = ImageFrame(px)
    hand = BinaryMask(np.array([[1, 0]], dtype=np.uint8))
    x = prepare_input(frame, hand)
    assert x[0, 0, 0] == 1.0
    assert x[0, 0, 1] == pytest.approx(128 / 255, abs=1e-7)
    assert x[3, 0, 0] == 1.0 and x[3, 0, 1] == 0.0


def test_prepare_input_shape_mismatch():
    frame = ImageFrame(np.zeros((4, 4, 3), dtype=np.uint8))
    hand = BinaryMask(np.zeros((4, 5), dtype=np.uint8))
    with pytest.raises(ShapeError):
        prepare_input(frame, hand)


# ---------------------------------------------------------------------------
# estimator behavior

def test_unfitted_predict_raises_state_error():
    model = HighlightSegmenter(backbone="tiny-cnn")
    frame = ImageFrame(np.zeros((8, 8, 3), dtype=np.uint8))
    hand = BinaryMask(np.zeros((8, 8), dtype=np.uint8))
    with pytest.raises(StateError):
        model.predict_one(frame, hand)


def test_zeroed_head_outputs_half_everywhere():
    model = HighlightSegmenter(backbone="tiny-cnn", decoder="unet")
    torch.manual_seed(0)
    net = EncoderDecoderNet("tiny-cnn", "unet", 4)
    with torch.no_grad():
        net.decoder.head.weight.zero_()
        net.decoder.head.bias.zero_()
    net.eval()
    model.net_ = net
    model.fitted_input_size_ = (64, 64)
    frame = ImageFrame(np.random.default_rng(0).integers(0, 256, (64, 64, 3), dtype=np.uint8))
    hand = BinaryMask(np.zeros((64, 64), dtype=np.uint8))
    out = model.predict_one(frame, hand)
    assert np.allclose(out.values, 0.5, atol=1e-7)


def test_prediction_range_shape_and_resize(quick_model):
    rng = np.random.default_rng(1)
    # frame larger than the network input exercises the resize path
    frame = ImageFrame(rng.integers(0, 256, (96, 112, 3), dtype=np.uint8))
    hand = BinaryMask(rng.integers(0, 2, (96, 112), dtype=np.uint8))
    out = predict_highlight(quick_model, frame, hand)
    assert out.shape == frame.shape
    assert float(out.values.min()) >= 0.0
    assert float(out.values.max()) <= 1.0


def test_hand_channel_changes_prediction(quick_model, tiny_data):
    X, _ = tiny_data
    frame, hand = X[0]
    other_hand = BinaryMask(1 - hand.values)
    a = quick_model.predict_one(frame, hand).values
    b = quick_model.predict_one(frame, other_hand).values
    assert not np.allclose(a, b)


def test_fixed_batch_losses_strictly_decrease(tiny_data):
    X, y = tiny_data
    model = HighlightSegmenter(
        backbone="tiny-cnn", decoder="unet", epochs=5, batch_size=len(X),
        lr_hold_head=1, lr_hold_tail=1, seed=0,
    )
    model.fit(X, y)
    losses = model.loss_history_
    assert len(losses) == 5
    assert all(a > b for a, b in zip(losses, losses[1:]))


def test_fit_validations(tiny_data):
    X, y = tiny_data
    with pytest.raises(DatasetError):
        HighlightSegmenter(backbone="tiny-cnn", epochs=3, lr_hold_head=1, lr_hold_tail=1).fit([], [])
    with pytest.raises(ArgumentError):
        HighlightSegmenter(backbone="tiny-cnn", epochs=3, lr_hold_head=1, lr_hold_tail=1).fit(X, y[:-1])
    with pytest.raises(ConfigError):
        HighlightSegmenter(backbone="tiny-cnn", decoder="nope", epochs=3,
                           lr_hold_head=1, lr_hold_tail=1).fit(X, y)


def test_save_load_round_trip(quick_model, tiny_data, tmp_path):
    X, _ = tiny_data
    quick_model.save(tmp_path)
    again = HighlightSegmenter.load(tmp_path)
    frame, hand = X[2]
    a = quick_model.predict_one(frame, hand).values
    b = again.predict_one(frame, hand).values
    assert np.allclose(a, b, atol=1e-7)
    assert again.input_channels == 4


# ---------------------------------------------------------------------------
# dataset-driven training

@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return write_hutics_corpus(root, n_participants=3, per_participant=4, seed=9)


def test_train_highlighter_reports_test_miou(corpus):
    records = load_hutics(corpus).records
    split = split_by_participant(records, 0.67, seed=1)
    config = HighlighterTrainConfig(epochs=4, batch_size=4, lr_hold_head=1, lr_hold_tail=1, seed=0)
    handseg = HandSegmentorConfig(backend_id="oracle", model_path=str(corpus / "hands"))
    model, report = train_highlighter(split, "tiny-cnn+unet", config, handseg)
    assert 0.0 <= report.miou <= 1.0
    assert len(report.per_image_iou) == len(split.test)
    assert model.trained_miou_ == report.miou


def test_train_highlighter_deterministic_given_seed(corpus):
    records = load_hutics(corpus).records
    split = split_by_participant(records, 0.67, seed=1)
    config = HighlighterTrainConfig(epochs=2, batch_size=4, lr_hold_head=0, lr_hold_tail=1, seed=7)
    handseg = HandSegmentorConfig(backend_id="oracle", model_path=str(corpus / "hands"))
    _, r1 = train_highlighter(split, "tiny-cnn+unet", config, handseg)
    _, r2 = train_highlighter(split, "tiny-cnn+unet", config, handseg)
    assert r1.per_image_iou == r2.per_image_iou


def test_train_highlighter_empty_split(corpus):
    records = load_hutics(corpus).records
    split = split_by_participant(records, 0.67, seed=1)
    empty = type(split)(train=(), test=split.test, seed=1, ratio=0.67)
    config = HighlighterTrainConfig(epochs=2, lr_hold_head=0, lr_hold_tail=1)
    handseg = HandSegmentorConfig(backend_id="constant")
    with pytest.raises(DatasetError):
        train_highlighter(empty, "tiny-cnn+unet", config, handseg)
