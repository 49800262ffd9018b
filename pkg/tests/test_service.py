import json

import pytest
from fastapi.testclient import TestClient

from gesturepipe.config import AppConfig
from gesturepipe.corpus import FRAME_STEP_US, template_frame
from gesturepipe.landmarks import serialize_frame
from gesturepipe.service import build_app

from conftest import frame_line, make_frame


@pytest.fixture()
def client():
    app = build_app(AppConfig())
    with TestClient(app) as c:
        yield c


def session_lines(label, n, step_us=FRAME_STEP_US, conf=0.95):
    lines = []
    for i in range(n):
        frame = template_frame(label, t_us=i * step_us, confidence=conf)
        lines.append(serialize_frame(frame))
    return lines


def drain_events(ws, until_types, limit=200):
    """Read events until every type in until_types was seen (or limit)."""
    seen = []
    want = set(until_types)
    for _ in range(limit):
        record = ws.receive_json()
        seen.append(record)
        want.discard(record["type"])
        if not want:
            break
    return seen


class TestSessionLifecycle:
    def test_health(self, client):
        response = client.get("/v1/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_create_distinct_ids(self, client):
        a = client.post("/v1/sessions", json={}).json()["id"]
        b = client.post("/v1/sessions", json={}).json()["id"]
        assert a != b

    def test_default_mode_confirm(self, client):
        body = client.post("/v1/sessions", json={}).json()
        assert body["mode"] == "confirm"

    def test_invalid_mode_400(self, client):
        response = client.post("/v1/sessions", json={"mode": "yolo"})
        assert response.status_code == 400
        assert "mode" in response.json()["error"]


class TestFrameIngest:
    def test_static_stream_events(self, client):
        sid = client.post("/v1/sessions", json={"mode": "auto"}).json()["id"]
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
            snapshot = events.receive_json()
            assert snapshot["type"] == "snapshot"
            with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                for line in session_lines("open_palm", 40):
                    frames.send_text(line)
                seen = drain_events(events, {"KeyframeEmitted", "InterpretationReady"})
        types = [e["type"] for e in seen]
        assert "FrameAccepted" in types
        assert "KeyframeEmitted" in types
        kf = next(e for e in seen if e["type"] == "KeyframeEmitted")
        assert kf["payload"]["reason"] == "First"

    def test_low_confidence_rejected(self, client):
        sid = client.post("/v1/sessions", json={}).json()["id"]
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
            events.receive_json()
            with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                frames.send_text(session_lines("fist", 1, conf=0.1)[0])
                seen = drain_events(events, {"FrameRejected"})
        assert seen[-1]["type"] == "FrameRejected"
        assert "confidence" in seen[-1]["payload"]["reason"]

    def test_garbage_line_error_session_continues(self, client):
        sid = client.post("/v1/sessions", json={"mode": "auto"}).json()["id"]
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
            events.receive_json()
            with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                frames.send_text("{broken json")
                frames.send_text(session_lines("fist", 1)[0])
                seen = drain_events(events, {"Error", "FrameAccepted"})
        types = [e["type"] for e in seen]
        assert "Error" in types and "FrameAccepted" in types

    def test_non_monotonic_closes_stream(self, client):
        sid = client.post("/v1/sessions", json={"mode": "auto"}).json()["id"]
        lines = session_lines("fist", 1) * 2  # same timestamp twice
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
            events.receive_json()
            with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                frames.send_text(lines[0])
                frames.send_text(lines[1])
                seen = drain_events(events, {"Error"})
        fatal = [e for e in seen if e["type"] == "Error"]
        assert fatal and fatal[-1]["payload"].get("fatal")


from contextlib import contextmanager


@contextmanager
def confirm_session(client, label="open_palm", n=3):
    """Open a confirm-mode session, ingest frames, wait for the pending
    command; yields (sid, events socket, seen events, pending events)."""
    sid = client.post("/v1/sessions", json={"mode": "confirm"}).json()["id"]
    with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
        events.receive_json()  # snapshot
        with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
            for line in session_lines(label, n):
                frames.send_text(line)
            seen = drain_events(events, {"CommandPending"})
        pending = [e for e in seen if e["type"] == "CommandPending"]
        yield sid, events, seen, pending


def next_of_type(ws, type_, limit=50):
    for _ in range(limit):
        record = ws.receive_json()
        if record["type"] == type_:
            return record
    raise AssertionError(f"no {type_} event within {limit} messages")


class TestConfirmGate:
    def test_pending_then_confirm_dispatches(self, client):
        with confirm_session(client) as (sid, events, seen, pending):
            assert pending, "expected a pending command"
            assert not any(e["type"] == "CommandDispatched" for e in seen)
            cmd_id = pending[0]["payload"]["cmd_id"]
            response = client.post(f"/v1/sessions/{sid}/commands/{cmd_id}",
                                   json={"verdict": "confirm"})
            assert response.status_code == 200
            record = next_of_type(events, "CommandDispatched")
            assert record["payload"]["cmd_id"] == cmd_id

    def test_reject_drops_command(self, client):
        with confirm_session(client) as (sid, events, _, pending):
            cmd_id = pending[0]["payload"]["cmd_id"]
            client.post(f"/v1/sessions/{sid}/commands/{cmd_id}",
                        json={"verdict": "reject"})
            record = next_of_type(events, "CommandRejected")
            assert record["payload"]["reason"] == "rejected by operator"

    def test_override_out_of_box_rejected(self, client):
        with confirm_session(client) as (sid, events, _, pending):
            cmd_id = pending[0]["payload"]["cmd_id"]
            response = client.post(
                f"/v1/sessions/{sid}/commands/{cmd_id}",
                json={"verdict": "override",
                      "command": {"type": "move_to", "x": 9, "y": 9, "z": 9}})
            assert response.status_code == 200
            record = next_of_type(events, "CommandRejected")
            assert "WorkspaceViolation" in record["payload"]["reason"]

    def test_override_dispatches_replacement(self, client):
        with confirm_session(client) as (sid, events, _, pending):
            cmd_id = pending[0]["payload"]["cmd_id"]
            client.post(f"/v1/sessions/{sid}/commands/{cmd_id}",
                        json={"verdict": "override", "command": {"type": "stop"}})
            record = next_of_type(events, "CommandDispatched")
            assert record["payload"]["command"] == {"type": "stop"}

    def test_resolve_twice_unknown(self, client):
        with confirm_session(client) as (sid, events, _, pending):
            cmd_id = pending[0]["payload"]["cmd_id"]
            first = client.post(f"/v1/sessions/{sid}/commands/{cmd_id}",
                                json={"verdict": "confirm"})
            assert first.status_code == 200
            second = client.post(f"/v1/sessions/{sid}/commands/{cmd_id}",
                                 json={"verdict": "confirm"})
            assert second.status_code == 404

    def test_unknown_session_404(self, client):
        response = client.post("/v1/sessions/nope/commands/c1",
                               json={"verdict": "confirm"})
        assert response.status_code == 404


class TestEventOrdering:
    def test_gapless_sequence(self, client):
        sid = client.post("/v1/sessions", json={"mode": "auto"}).json()["id"]
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
            snapshot = events.receive_json()
            last = snapshot["seq"]
            with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                for line in session_lines("vulcan_salute", 20):
                    frames.send_text(line)
                seen = drain_events(events, {"CommandDispatched"})
        for record in seen:
            assert record["seq"] == last + 1
            last = record["seq"]

    def test_snapshot_carries_pending(self, client):
        with confirm_session(client) as (sid, events, _, pending):
            cmd_id = pending[0]["payload"]["cmd_id"]
        with client.websocket_connect(f"/v1/sessions/{sid}/events") as late:
            snapshot = late.receive_json()
            assert snapshot["type"] == "snapshot"
            assert [p["cmd_id"] for p in snapshot["payload"]["pending"]] == [cmd_id]
            assert snapshot["payload"]["mode"] == "confirm"


def normalize_log(records, sid):
    out = []
    for r in records:
        r = json.loads(json.dumps(r).replace(sid, "SESSION"))
        r.get("payload", {}).pop("latency_us", None)
        out.append(r)
    return out


class TestGoldenReplayThroughService:
    def test_byte_identical_event_logs(self):
        # two fresh service instances replaying the same recorded stream
        logs = []
        for _ in range(2):
            app = build_app(AppConfig())
            with TestClient(app) as client:
                sid = client.post("/v1/sessions", json={"mode": "auto"}).json()["id"]
                with client.websocket_connect(f"/v1/sessions/{sid}/events") as events:
                    events.receive_json()
                    with client.websocket_connect(f"/v1/sessions/{sid}/frames") as frames:
                        for line in session_lines("shaka_sign", 15):
                            frames.send_text(line)
                        seen = drain_events(events, {"CommandDispatched"})
                logs.append(json.dumps(normalize_log(seen, sid), sort_keys=True))
        assert logs[0] == logs[1]
