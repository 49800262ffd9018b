"""Hand landmark data model, wire format and hand-centric normalization.

Coordinate conventions:
- x, y are normalized image coordinates in [0, 1]; larger y is lower on screen.
- z is unitless relative depth. It is carried through but all distances and
  directions in this package are computed in the x-y plane.
- One frame is exactly 21 points: wrist + four joints per finger.

Wire format (one NDJSON record per line, UTF-8):
    {"t_us": <int>, "hand": "Left"|"Right", "conf": <float>, "pts": [[x,y,z], ...21...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum

from .errors import DegenerateHand, MalformedRecord, SchemaViolation

POINT_COUNT = 21
WRIST = 0

# Minimum palm width before scale-relative thresholds stop meaning anything.
MIN_HAND_SIZE = 1e-6

DEFAULT_MIN_CONFIDENCE = 0.5


class Handedness(Enum):
    Left = "Left"
    Right = "Right"


class FingerId(IntEnum):
    Thumb = 0
    Index = 1
    Middle = 2
    Ring = 3
    Pinky = 4


# Joint chains in proximal-to-distal order (MCP-equivalent, PIP-equivalent,
# DIP-equivalent, TIP). Together with the wrist they cover all 21 indices.
FINGER_CHAINS: dict[FingerId, tuple[int, int, int, int]] = {
    FingerId.Thumb: (1, 2, 3, 4),
    FingerId.Index: (5, 6, 7, 8),
    FingerId.Middle: (9, 10, 11, 12),
    FingerId.Ring: (13, 14, 15, 16),
    FingerId.Pinky: (17, 18, 19, 20),
}

FINGER_MCP = {f: chain[0] for f, chain in FINGER_CHAINS.items()}
FINGER_TIP = {f: chain[3] for f, chain in FINGER_CHAINS.items()}

INDEX_MCP = FINGER_MCP[FingerId.Index]
PINKY_MCP = FINGER_MCP[FingerId.Pinky]

Point = tuple[float, float, float]


@dataclass(frozen=True)
class LandmarkFrame:
    """One timestamped 21-point hand observation.

    Frames coming off the wire are raw (image coordinates). `hand_centric`
    frames are the output of normalize(): wrist at the origin, coordinates in
    palm-width units. Only raw frames may be serialized.
    """

    timestamp_us: int
    handedness: Handedness
    confidence: float
    points: tuple[Point, ...]
    hand_centric: bool = field(default=False, compare=False)

    def point(self, index: int) -> Point:
        return self.points[index]


def planar_distance(a: Point, b: Point) -> float:
    """Euclidean distance in the x-y plane."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _require(cond: bool, path: str, detail: str) -> None:
    if not cond:
        raise SchemaViolation(f"{path}: {detail}")


def _check_number(value, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, "expected a number")
    out = float(value)
    _require(math.isfinite(out), path, "must be finite")
    return out


def parse_frame(line: str) -> LandmarkFrame:
    """Parse one NDJSON landmark record into a validated LandmarkFrame.

    Raises MalformedRecord for JSON syntax problems and SchemaViolation (with
    the offending field path in the message) for structural/range problems.
    """
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg} at column {exc.colno}") from exc
    if not isinstance(record, dict):
        raise MalformedRecord("record is not a JSON object")

    for key in ("t_us", "hand", "conf", "pts"):
        _require(key in record, key, "missing field")

    t_us = record["t_us"]
    _require(isinstance(t_us, int) and not isinstance(t_us, bool), "t_us", "expected an integer")
    _require(t_us >= 0, "t_us", "must be non-negative")

    hand = record["hand"]
    _require(hand in ("Left", "Right"), "hand", 'expected "Left" or "Right"')

    conf = _check_number(record["conf"], "conf")
    _require(0.0 <= conf <= 1.0, "conf", "out of [0,1]")

    pts = record["pts"]
    _require(isinstance(pts, list), "pts", "expected a list")
    _require(len(pts) == POINT_COUNT, "pts", f"expected {POINT_COUNT} points, got {len(pts)}")

    points: list[Point] = []
    for i, raw in enumerate(pts):
        _require(isinstance(raw, list) and len(raw) == 3,
                 f"pts[{i}]", "expected [x, y, z]")
        x = _check_number(raw[0], f"pts[{i}].x")
        y = _check_number(raw[1], f"pts[{i}].y")
        z = _check_number(raw[2], f"pts[{i}].z")
        _require(0.0 <= x <= 1.0, f"pts[{i}].x", "out of [0,1]")
        _require(0.0 <= y <= 1.0, f"pts[{i}].y", "out of [0,1]")
        points.append((x, y, z))

    return LandmarkFrame(
        timestamp_us=t_us,
        handedness=Handedness(hand),
        confidence=conf,
        points=tuple(points),
    )


def serialize_frame(frame: LandmarkFrame) -> str:
    """Canonical one-line JSON for a raw frame.

    Uses shortest round-trip decimals (Python float repr) and a fixed key
    order, so equal frames always produce byte-identical lines.
    """
    if frame.hand_centric:
        raise ValueError("hand-centric frames are internal and not serialized")
    record = {
        "t_us": frame.timestamp_us,
        "hand": frame.handedness.value,
        "conf": frame.confidence,
        "pts": [[x, y, z] for x, y, z in frame.points],
    }
    return json.dumps(record, separators=(",", ":"))


def accept_frame(frame: LandmarkFrame, min_confidence: float = DEFAULT_MIN_CONFIDENCE) -> bool:
    """Confidence gate; inclusive at the boundary."""
    return frame.confidence >= min_confidence


def hand_size(frame: LandmarkFrame) -> float:
    """Palm width: planar distance between index MCP and pinky MCP.

    This is the pipeline's universal scale unit; it is stable under finger
    articulation, unlike tip-based extents.
    """
    size = planar_distance(frame.point(INDEX_MCP), frame.point(PINKY_MCP))
    if size < MIN_HAND_SIZE:
        raise DegenerateHand(f"palm width {size:g} below {MIN_HAND_SIZE:g}")
    return size


def normalize(frame: LandmarkFrame) -> LandmarkFrame:
    """Translate the wrist to the origin and rescale to palm-width units.

    Idempotent within floating-point error: a normalized frame has palm
    width 1 and wrist (0,0,0), so normalizing again is a no-op.
    """
    size = hand_size(frame)
    wx, wy, wz = frame.point(WRIST)
    points = tuple(
        ((x - wx) / size, (y - wy) / size, (z - wz) / size)
        for x, y, z in frame.points
    )
    return replace(frame, points=points, hand_centric=True)
