import json

import numpy as np
import pytest

from gestureteach.core import BinaryMask, ImageFrame, SoftMask
from gestureteach.datamgmt import (
    SessionState,
    load_hutics,
    load_session,
    make_sample,
    quantize_soft,
    save_session,
    split_by_participant,
)
from gestureteach.datamgmt.synthetic import write_hutics_corpus
from gestureteach.errors import DatasetError, SessionFormatError, ShapeError
from gestureteach.teachtrain import ClassDef


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("hutics")
    write_hutics_corpus(root, n_participants=5, per_participant=12, seed=3)
    return root


# ---------------------------------------------------------------------------
# loader

def test_load_counts(corpus):
    result = load_hutics(corpus)
    assert len(result.records) == 60
    assert len(result.participant_counts) == 5
    assert all(v == 12 for v in result.participant_counts.values())
    # 12 images per participant, 3 per gesture category
    assert all(v == 15 for v in result.gesture_counts.values())
    assert result.issues == []


def test_load_is_order_stable_and_idempotent(corpus):
    a = load_hutics(corpus)
    b = load_hutics(corpus)
    assert [r.source_id for r in a.records] == [r.source_id for r in b.records]
    keys = [(r.participant_id, str(r.image_path)) for r in a.records]
    assert keys == sorted(keys)


def test_records_load_pixels(corpus):
    rec = load_hutics(corpus).records[0]
    frame = rec.load_frame()
    mask = rec.load_object_mask()
    assert frame.shape == mask.shape == (64, 64)
    assert frame.source_id == rec.source_id
    assert mask.popcount() > 0


def test_polygon_masks_rasterize(tmp_path):
    root = write_hutics_corpus(
        tmp_path, n_participants=1, per_participant=4, seed=0, polygon_masks=True
    )
    result = load_hutics(root)
    assert len(result.records) == 4
    mask = result.records[0].load_object_mask()
    assert mask.popcount() > 0


def test_empty_directory_fails(tmp_path):
    with pytest.raises(DatasetError, match="no records"):
        load_hutics(tmp_path)


def test_invalid_records_are_itemized_not_fatal(corpus, tmp_path):
    entries = json.loads((corpus / "metadata.json").read_text())
    bad = dict(entries[0])
    bad["gesture"] = "juggling"
    missing = dict(entries[1])
    missing["image"] = "images/ghost.jpg"
    meta = entries + [bad, missing]
    root = tmp_path
    (root / "metadata.json").write_text(json.dumps(meta))
    for sub in ("images", "masks"):
        (root / sub).symlink_to(corpus / sub)
    result = load_hutics(root)
    assert len(result.records) == 60
    assert len(result.issues) == 2
    assert any("juggling" in i for i in result.issues)
    assert any("ghost" in i for i in result.issues)


def test_all_invalid_records_fail(tmp_path):
    (tmp_path / "metadata.json").write_text(
        json.dumps([{"image": "nope.jpg", "mask": "nope.png", "participant": "p", "gesture": "pointing"}])
    )
    with pytest.raises(DatasetError, match="no records"):
        load_hutics(tmp_path)


# ---------------------------------------------------------------------------
# splitting

class Rec:
    def __init__(self, pid, i):
        self.participant_id = pid
        self.idx = i


def make_records(n_participants, per=12):
    return [Rec(f"p{p:03d}", i) for p in range(n_participants) for i in range(per)]


def test_split_170_participants_gives_136_train():
    records = make_records(170)
    split = split_by_participant(records, 0.8, seed=0)
    assert len(split.train_participants) == 136
    assert len(split.train) == 136 * 12
    assert len(split.test) == (170 - 136) * 12


def test_split_two_participants_floor_rule():
    records = make_records(2)
    split = split_by_participant(records, 0.8, seed=5)
    assert len(split.train_participants) == 1
    assert len(split.test_participants) == 1


def test_split_deterministic_given_seed():
    records = make_records(13)
    a = split_by_participant(records, 0.6, seed=99)
    b = split_by_participant(records, 0.6, seed=99)
    assert a.train_participants == b.train_participants
    assert [r.idx for r in a.train] == [r.idx for r in b.train]


def test_split_requires_two_participants():
    with pytest.raises(DatasetError):
        split_by_participant(make_records(1), 0.8, seed=0)


def test_split_property_randomized():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 25))
        records = make_records(n, per=int(rng.integers(1, 5)))
        ratio = float(rng.uniform(0.05, 0.95))
        seed = int(rng.integers(0, 10_000))
        split = split_by_participant(records, ratio, seed)
        assert split.train_participants.isdisjoint(split.test_participants)
        ids = sorted(id(r) for r in split.train + split.test)
        assert ids == sorted(id(r) for r in records)


# ---------------------------------------------------------------------------
# session persistence

def rand_sample(rng, sample_id, class_id, session_id="sess"):
    frame = ImageFrame(rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8), source_id=sample_id)
    soft = SoftMask(rng.uniform(0, 1, size=(16, 16)))
    return make_sample(sample_id, class_id, frame, soft, "2026-08-09T12:00:00+00:00", session_id)


def test_quantize_soft_makes_binarize_stable():
    rng = np.random.default_rng(1)
    soft = SoftMask(rng.uniform(0, 1, size=(8, 8)))
    q = quantize_soft(soft)
    assert np.array_equal(quantize_soft(q).values, q.values)


def test_empty_session_round_trip(tmp_path):
    state = SessionState(session_id="s0")
    save_session(state, tmp_path)
    assert (tmp_path / "session.json").exists()
    assert list((tmp_path / "samples").glob("*")) == []
    again = load_session(tmp_path)
    assert again == state


def test_full_session_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    classes = [ClassDef(0, "mug"), ClassDef(1, "pen"), ClassDef(2, "book")]
    samples = [
        rand_sample(rng, f"s{c}{i}", c) for c in range(3) for i in range(4)
    ]
    state = SessionState(session_id="sess", classes=classes, samples=samples, active_class=1)
    state.recount()
    save_session(state, tmp_path)
    pngs = list((tmp_path / "samples").glob("*.png"))
    assert len(pngs) == 3 * len(samples)
    again = load_session(tmp_path)
    assert again == state
    assert [c.sample_count for c in again.classes] == [4, 4, 4]


def test_corrupt_manifest_names_field(tmp_path):
    state = SessionState(session_id="s1", classes=[ClassDef(0, "a")])
    save_session(state, tmp_path)
    manifest = json.loads((tmp_path / "session.json").read_text())
    del manifest["classes"][0]["label"]
    (tmp_path / "session.json").write_text(json.dumps(manifest))
    with pytest.raises(SessionFormatError, match=r"classes\[0\].label"):
        load_session(tmp_path)


def test_sample_requires_consistent_binarization():
    rng = np.random.default_rng(3)
    frame = ImageFrame(rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8))
    soft = SoftMask(np.full((4, 4), 0.9))
    from gestureteach.datamgmt import TeachingSample

    with pytest.raises(ShapeError):
        TeachingSample(
            sample_id="x",
            class_id=0,
            frame=frame,
            highlight_soft=soft,
            highlight_bin=BinaryMask(np.zeros((4, 4), dtype=np.uint8)),
            captured_at="t",
            session_id="s",
        )
