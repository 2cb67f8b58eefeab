import json
import time

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from gestureteach.core import BinaryMask, ImageFrame
from gestureteach.datamgmt import load_session
from gestureteach.datamgmt.synthetic import make_highlight_dataset, single_object_scene
from gestureteach.handseg import HandSegmentor, HandSegmentorConfig
from gestureteach.highlighter import HighlightSegmenter
from gestureteach.service import (
    FramePipeline,
    ServeConfig,
    TrainDefaults,
    create_app,
    message_schema,
    replay_events,
    validate_message,
)
from gestureteach.service.wire import capture_message, frame_message


@pytest.fixture(scope="module")
def tiny_highlighter():
    # one epoch is enough: the service tests exercise flow, not quality
    data = make_highlight_dataset(n=4, seed=1)
    model = HighlightSegmenter(
        backbone="tiny-cnn", decoder="unet", epochs=1, batch_size=4,
        lr_hold_head=0, lr_hold_tail=0, seed=0,
    )
    X = [(f, h) for f, h, gt, _ in data]
    y = [gt for _, _, gt, _ in data]
    return model.fit(X, y)


def make_config():
    return ServeConfig(
        handseg_backend="constant",
        train=TrainDefaults(encoder="tiny-cnn", epochs=3, pretrained_encoder=False),
    )


@pytest.fixture()
def client(tmp_path, tiny_highlighter):
    app = create_app(make_config(), highlighter=tiny_highlighter, sessions_root=tmp_path)
    with TestClient(app) as c:
        c.sessions_root = tmp_path
        yield c


def synth_frame(rng, shape="circle"):
    frame, _ = single_object_scene(rng, shape)
    return frame


# ---------------------------------------------------------------------------
# REST lifecycle

def test_new_session_starts_teaching_with_no_classes(client):
    r = client.post("/sessions")
    assert r.status_code == 201
    body = r.json()
    assert body["mode"] == "teaching"
    assert body["classes"] == []
    assert body["active_class"] is None


def test_add_classes_assigns_contiguous_ids(client):
    sid = client.post("/sessions").json()["session_id"]
    ids = [
        client.post(f"/sessions/{sid}/classes", json={"label": lab}).json()["id"]
        for lab in ("mug", "pen", "book")
    ]
    assert ids == [0, 1, 2]
    view = client.get(f"/sessions/{sid}").json()
    assert view["active_class"] == 0


def test_duplicate_label_conflicts(client):
    sid = client.post("/sessions").json()["session_id"]
    client.post(f"/sessions/{sid}/classes", json={"label": "mug"})
    r = client.post(f"/sessions/{sid}/classes", json={"label": "mug"})
    assert r.status_code == 409


def test_assessment_before_training_is_rejected(client):
    sid = client.post("/sessions").json()["session_id"]
    r = client.post(f"/sessions/{sid}/mode", json={"mode": "assessment"})
    assert r.status_code == 409


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/classes", json={"label": "x"}).status_code == 404


def test_train_requires_two_sampled_classes(client):
    sid = client.post("/sessions").json()["session_id"]
    client.post(f"/sessions/{sid}/classes", json={"label": "only"})
    r = client.post(f"/sessions/{sid}/train", json={})
    assert r.status_code == 400


def test_config_and_schema_endpoints(client):
    cfg = client.get("/config").json()
    assert cfg["stream"]["max_fps"] == 24
    assert cfg["capture"] == {"width": 640, "height": 480}
    schema = client.get("/schema/stream").json()
    jsonschema.Draft7Validator.check_schema(schema)
    assert schema == message_schema()


# ---------------------------------------------------------------------------
# streaming

def test_stream_highlight_and_capture(client):
    rng = np.random.default_rng(0)
    sid = client.post("/sessions").json()["session_id"]
    client.post(f"/sessions/{sid}/classes", json={"label": "mug"})
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_json(frame_message(0, synth_frame(rng)))
        msg = ws.receive_json()
        validate_message(msg)
        assert msg["type"] == "highlight"
        assert msg["seq"] == 0
        assert msg["latency_ms"] >= 0

        ws.send_json(capture_message())
        ack = ws.receive_json()
        validate_message(ack)
        assert ack["type"] == "captured"
        assert ack["class_id"] == 0
        assert ack["sample_count"] == 1

    view = client.get(f"/sessions/{sid}").json()
    assert view["classes"][0]["sample_count"] == 1
    # persisted before acknowledging: reload from disk agrees
    state = load_session(client.sessions_root / sid)
    assert len(state.samples) == 1
    assert state.classes[0].sample_count == 1


def test_capture_without_frame_is_state_error(client):
    sid = client.post("/sessions").json()["session_id"]
    client.post(f"/sessions/{sid}/classes", json={"label": "mug"})
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_json(capture_message())
        msg = ws.receive_json()
        assert msg["type"] == "error"
        assert msg["code"] == "state"


def test_malformed_message_reports_protocol_error(client):
    sid = client.post("/sessions").json()["session_id"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_json({"v": 1, "type": "frame", "seq": -3, "data": "AAAA"})
        msg = ws.receive_json()
        assert msg["type"] == "error" and msg["code"] == "protocol"
        ws.send_json({"hello": "world"})
        msg = ws.receive_json()
        assert msg["type"] == "error" and msg["code"] == "protocol"
        # undecodable payload passes the schema but fails decoding
        ws.send_json({"v": 1, "type": "frame", "seq": 0, "data": "bm90YWpwZWc="})
        msg = ws.receive_json()
        assert msg["type"] == "error" and msg["code"] == "protocol"


def test_latest_wins_drops_under_load(tmp_path, tiny_highlighter):
    class SlowModel:
        input_channels = 4

        def predict_one(self, frame, hand):
            time.sleep(0.05)
            return tiny_highlighter.predict_one(frame, hand)

    app = create_app(make_config(), highlighter=SlowModel(), sessions_root=tmp_path)
    rng = np.random.default_rng(1)
    with TestClient(app) as client:
        sid = client.post("/sessions").json()["session_id"]
        n = 10
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            frame = synth_frame(rng)
            for seq in range(n):
                ws.send_json(frame_message(seq, frame))
            got = []
            while True:
                msg = ws.receive_json()
                assert msg["type"] == "highlight"
                got.append(msg)
                if msg["seq"] == n - 1:
                    break
        assert len(got) < n  # some frames were dropped, never queued
        assert got[-1]["drops"] > 0
        seqs = [m["seq"] for m in got]
        assert seqs == sorted(seqs)


# ---------------------------------------------------------------------------
# training + assessment flow

def teach_and_train(client, rng, labels=("circle", "square"), captures=2, epochs=2):
    sid = client.post("/sessions").json()["session_id"]
    for lab in labels:
        client.post(f"/sessions/{sid}/classes", json={"label": lab})
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        seq = 0
        for class_id, lab in enumerate(labels):
            client.post(f"/sessions/{sid}/active-class", json={"class_id": class_id})
            for _ in range(captures):
                ws.send_json(frame_message(seq, synth_frame(rng, lab)))
                while ws.receive_json()["type"] != "highlight":
                    pass
                ws.send_json(capture_message())
                ack = ws.receive_json()
                assert ack["type"] == "captured" and ack["class_id"] == class_id
                seq += 1
    r = client.post(f"/sessions/{sid}/train", json={"epochs": epochs, "lambda": 1.0})
    assert r.status_code == 202
    return sid, r.json()["job_id"]


def wait_done(client, job_id, timeout=300.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.1)
    raise TimeoutError(job_id)


def test_full_training_flow_reaches_assessment(client):
    rng = np.random.default_rng(2)
    sid, job_id = teach_and_train(client, rng)
    progress_seen = []
    job = wait_done(client, job_id)
    assert job["status"] == "done", job["error"]
    assert job["result_dir"]

    r = client.post(f"/sessions/{sid}/mode", json={"mode": "assessment"})
    assert r.status_code == 200
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_json(frame_message(0, synth_frame(rng, "circle")))
        msg = ws.receive_json()
        validate_message(msg)
        assert msg["type"] == "prediction"
        assert abs(sum(msg["confidences"]) - 1.0) < 1e-6
        assert msg["predicted_label"] in ("circle", "square")


def test_second_training_job_conflicts(client):
    rng = np.random.default_rng(3)
    sid, job_id = teach_and_train(client, rng, epochs=30)
    r = client.post(f"/sessions/{sid}/train", json={})
    assert r.status_code == 409
    wait_done(client, job_id)


def test_job_progress_monotone(client):
    rng = np.random.default_rng(4)
    sid, job_id = teach_and_train(client, rng, epochs=6)
    seen = []
    while True:
        job = client.get(f"/jobs/{job_id}").json()
        seen.append(job["progress"])
        if job["status"] in ("done", "failed"):
            break
        time.sleep(0.02)
    assert job["status"] == "done"
    assert seen == sorted(seen)
    assert seen[-1] == 6


def test_event_replay_reconstructs_state(client):
    rng = np.random.default_rng(5)
    sid, job_id = teach_and_train(client, rng)
    wait_done(client, job_id)
    client.post(f"/sessions/{sid}/mode", json={"mode": "assessment"})

    session_dir = client.sessions_root / sid
    replayed = replay_events(session_dir)
    loaded = load_session(session_dir)
    assert replayed == loaded
    assert replayed.mode == "assessment"
    assert len(replayed.samples) == 4


# ---------------------------------------------------------------------------
# mode fencing

def test_mode_switch_fences_in_flight_frames(tmp_path, tiny_highlighter):
    from gestureteach.service.state import SessionManager

    manager = SessionManager(make_config(), root=tmp_path)
    live = manager.create_session()
    manager.add_class(live.state.session_id, "mug")

    class SwitchingSegmentor:
        """Simulates a mode change landing while the frame is in flight."""

        def hand_mask(self, frame):
            live.mode_epoch += 1
            return BinaryMask(np.zeros(frame.shape, dtype=np.uint8))

    pipeline = FramePipeline(tiny_highlighter, SwitchingSegmentor())
    frame = synth_frame(np.random.default_rng(6))
    out = pipeline.process(live, 0, frame)
    assert out is None
    assert live.drops == 1
    assert live.last_processed is None
