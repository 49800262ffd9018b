"""Capture loop: camera frames in, NDJSON landmark records out.

The wire format matches the pipeline service's landmark schema exactly:

    {"t_us": <int>, "hand": "Left"|"Right", "conf": <float>, "pts": [[x,y,z] x21]}

Every emitted line is schema-valid by construction: coordinates are clamped
into [0,1], non-finite detections are skipped, and timestamps strictly
increase. Frames with no detected hand produce nothing.
"""

from __future__ import annotations

import json
import logging
import math
import time
from collections import deque
from dataclasses import dataclass

from .trackers import Detection

logger = logging.getLogger(__name__)

POINT_COUNT = 21

# Network sends may buffer at most this long before dropping oldest lines.
SEND_BUFFER_US = 2_000_000


@dataclass(frozen=True)
class BridgeConfig:
    camera: int | str = 0  # device index or video file path
    fps: float = 30.0
    output: str = "stdout"  # "stdout" or a ws:// frames-endpoint URL
    min_confidence: float = 0.5  # passed to the tracker, not used to filter
    max_frames: int | None = None

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")


def _clamp01(value: float) -> float:
    return 0.0 if value < 0.0 else 1.0 if value > 1.0 else value


def detection_to_record(detection: Detection, t_us: int) -> dict | None:
    """Schema-valid wire record, or None when the detection is unusable."""
    if len(detection.points) != POINT_COUNT:
        return None
    pts = []
    for x, y, z in detection.points:
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            return None
        pts.append([_clamp01(float(x)), _clamp01(float(y)), float(z)])
    conf = detection.score
    if not math.isfinite(conf):
        return None
    return {
        "t_us": t_us,
        "hand": detection.handedness,
        "conf": _clamp01(float(conf)),
        "pts": pts,
    }


def record_to_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


class StdoutEmitter:
    def __init__(self, stream=None):
        import sys

        self.stream = stream or sys.stdout

    def send(self, line: str) -> None:
        self.stream.write(line + "\n")
        self.stream.flush()

    def close(self) -> None:
        pass


class ServiceEmitter:
    """WebSocket sender with reconnect-and-resume.

    Lines that fail to send are buffered (bounded by a 2 s timestamp window,
    oldest dropped) and flushed after the next successful reconnect, so a
    service restart loses at most what fell out of the window and never
    duplicates a line.
    """

    def __init__(self, url: str, connect=None, reconnect_delay_s: float = 0.2,
                 max_attempts_per_send: int = 5):
        if connect is None:
            from websockets.sync.client import connect as ws_connect
            connect = ws_connect
        self._connect = connect
        self.url = url
        self.reconnect_delay_s = reconnect_delay_s
        self.max_attempts_per_send = max_attempts_per_send
        self._socket = None
        self._buffer: deque[tuple[int, str]] = deque()

    def _ensure_socket(self):
        if self._socket is None:
            self._socket = self._connect(self.url)
        return self._socket

    def _drop_stale(self, now_us: int) -> None:
        while self._buffer and now_us - self._buffer[0][0] > SEND_BUFFER_US:
            dropped = self._buffer.popleft()
            logger.warning("dropping stale buffered frame t_us=%d", dropped[0])

    def send(self, line: str) -> None:
        t_us = json.loads(line)["t_us"]
        self._buffer.append((t_us, line))
        self._drop_stale(t_us)
        for attempt in range(self.max_attempts_per_send):
            try:
                socket = self._ensure_socket()
                while self._buffer:
                    socket.send(self._buffer[0][1])
                    self._buffer.popleft()
                return
            except Exception as exc:
                logger.warning("send failed (%s); reconnecting", exc)
                self._socket = None
                time.sleep(self.reconnect_delay_s)
        logger.error("service unreachable; %d frames buffered", len(self._buffer))

    def close(self) -> None:
        if self._socket is not None:
            try:
                self._socket.close()
            finally:
                self._socket = None


def open_capture(camera: int | str):
    import cv2

    capture = cv2.VideoCapture(camera)
    if not capture.isOpened():
        raise RuntimeError(f"cannot open camera/video source: {camera!r}")
    return capture


def run_bridge(cfg: BridgeConfig, tracker, emitter=None, capture=None) -> int:
    """Pump frames from the source through the tracker to the emitter.

    Returns the number of emitted records. Timestamps derive from the frame
    index at the configured fps and are forced strictly increasing.
    """
    emitter = emitter or (StdoutEmitter() if cfg.output == "stdout"
                          else ServiceEmitter(cfg.output))
    own_capture = capture is None
    if capture is None:
        capture = open_capture(cfg.camera)

    emitted = 0
    frame_index = 0
    last_t_us = -1
    step_us = 1e6 / cfg.fps
    try:
        while cfg.max_frames is None or frame_index < cfg.max_frames:
            ok, frame = capture.read()
            if not ok:
                break  # end of stream / camera gone
            t_us = max(last_t_us + 1, int(round(frame_index * step_us)))
            frame_index += 1
            detection = tracker.detect(frame)
            if detection is None:
                continue
            record = detection_to_record(detection, t_us)
            if record is None:
                logger.warning("skipping unusable detection at t_us=%d", t_us)
                continue
            emitter.send(record_to_line(record))
            last_t_us = t_us
            emitted += 1
    finally:
        if own_capture:
            capture.release()
        emitter.close()
    return emitted
