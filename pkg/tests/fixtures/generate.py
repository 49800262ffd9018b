"""Regenerates the committed fixture session and its golden outputs.

Run from the repo root:  python3 tests/fixtures/generate.py

The session is a deterministic mixed recording: a held open palm (past the
timeout), a salute drifting east, an unrecognized three-finger pose, and a
closing fist. Goldens are what the current implementation produces for it;
they pin byte-level determinism across runs and machines.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

FIXTURES = Path(__file__).parent
sys.path.insert(0, str(FIXTURES.parent))  # for conftest-free imports

from gesturepipe.config import AppConfig
from gesturepipe.corpus import (
    FIST_FOLD,
    FRAME_STEP_US,
    FingerPose,
    HandPose,
    build_hand,
    template_frame,
    template_points,
)
from gesturepipe.features import FingerId, extract_features
from gesturepipe.keyframes import select_keyframes
from gesturepipe.landmarks import Handedness, LandmarkFrame, serialize_frame
from gesturepipe.rendering import render_context

# Not matched by any rule: exactly index+middle+ring extended.
THREE_UP = HandPose(fingers={
    FingerId.Thumb: FingerPose(100.0, (90.0, 70.0)),
    FingerId.Index: FingerPose(100.0),
    FingerId.Middle: FingerPose(90.0),
    FingerId.Ring: FingerPose(80.0),
    FingerId.Pinky: FingerPose(90.0, FIST_FOLD),
})


def fixture_frames():
    frames = []
    t = 0

    def emit(points, conf=0.95):
        nonlocal t
        frames.append(LandmarkFrame(timestamp_us=t, handedness=Handedness.Right,
                                    confidence=conf, points=tuple(points)))
        t += FRAME_STEP_US

    palm = template_points("open_palm")
    for _ in range(35):  # ~1.17 s: First + one Timeout keyframe
        emit(palm)
    emit(palm, conf=0.2)  # dropped by the confidence gate

    vulcan = template_points("vulcan_salute")
    for i in range(12):  # drifting east: FeatureChange then Displacement
        emit([(x + 0.02 * i, y, z) for x, y, z in vulcan])

    for _ in range(6):
        emit(build_hand(THREE_UP))

    fist = template_points("fist")
    for _ in range(6):
        emit(fist)
    return frames


def main() -> None:
    session_path = FIXTURES / "session_mixed.ndjson"
    session_path.write_text(
        "".join(serialize_frame(f) + "\n" for f in fixture_frames()),
        encoding="utf-8")

    from gesturepipe.cli import run_replay
    from gesturepipe.keyframes import KeyframeSelector
    from gesturepipe.landmarks import accept_frame, parse_frame
    from gesturepipe.pipeline import keyframe_summary

    cfg = AppConfig()

    selector = KeyframeSelector()
    keyframe_records = []
    window = []
    for line in session_path.read_text(encoding="utf-8").splitlines():
        frame = parse_frame(line)
        if not accept_frame(frame, cfg.min_confidence):
            continue
        kf = selector.push(extract_features(frame))
        if kf is not None:
            keyframe_records.append(keyframe_summary(kf))
            window.append(kf)
    (FIXTURES / "golden_keyframes.ndjson").write_text(
        "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in keyframe_records),
        encoding="utf-8")

    ctx = render_context(window[-4:])
    (FIXTURES / "golden_context.txt").write_text(ctx.text, encoding="utf-8")

    records, _ = run_replay(session_path, cfg)
    (FIXTURES / "golden_commands.ndjson").write_text(
        "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records),
        encoding="utf-8")

    # one rendered context per gesture template (regression corpus)
    from gesturepipe.corpus import GESTURE_LABELS

    contexts_dir = FIXTURES / "golden_contexts"
    contexts_dir.mkdir(exist_ok=True)
    for label in GESTURE_LABELS:
        kf = KeyframeSelector().push(extract_features(template_frame(label)))
        ctx = render_context([kf])
        (contexts_dir / f"{label}.txt").write_text(ctx.text, encoding="utf-8")

    print(f"wrote fixture ({len(fixture_frames())} frames, "
          f"{len(keyframe_records)} keyframes) and goldens")


if __name__ == "__main__":
    main()
