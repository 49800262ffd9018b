"""Discrete per-frame hand features: extension, 8-way direction, finger groups.

All geometry runs on the hand-centric normalized frame (wrist at origin,
palm-width units), so every threshold below is scale-free. Directions use the
screen-up convention: angle = atan2(-dy, dx) with image y growing downward,
so "N" means up on screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateHand, NotExtended
from .landmarks import (
    FINGER_CHAINS,
    FINGER_MCP,
    FINGER_TIP,
    FingerId,
    Handedness,
    LandmarkFrame,
    Point,
    hand_size,
    normalize,
    planar_distance,
)

MIN_SEGMENT = 1e-9


class CompassBucket(Enum):
    """Eight named 45-degree sectors, ordered counterclockwise from east."""

    E = 0
    NE = 1
    N = 2
    NW = 3
    W = 4
    SW = 5
    S = 6
    SE = 7


# Human-readable direction words used by the context renderer.
DIRECTION_WORDS = {
    CompassBucket.E: "right",
    CompassBucket.NE: "up-right",
    CompassBucket.N: "up",
    CompassBucket.NW: "up-left",
    CompassBucket.W: "left",
    CompassBucket.SW: "down-left",
    CompassBucket.S: "down",
    CompassBucket.SE: "down-right",
}


@dataclass(frozen=True)
class Compass8:
    """A quantized planar direction: the sector bucket plus the raw angle."""

    bucket: CompassBucket
    angle_deg: float

    @staticmethod
    def bucket_for(angle_deg: float) -> CompassBucket:
        """Map an angle in [0, 360) to its sector; lower bound inclusive.

        E covers [337.5, 360) + [0, 22.5); each further sector spans 45
        degrees counterclockwise.
        """
        shifted = (angle_deg + 22.5) % 360.0
        return CompassBucket(int(shifted // 45.0) % 8)

    @classmethod
    def from_vector(cls, dx: float, dy_image: float) -> "Compass8":
        """Direction of an image-plane vector, screen-up convention."""
        if math.hypot(dx, dy_image) < MIN_SEGMENT:
            raise DegenerateHand("direction vector shorter than 1e-9")
        angle = math.degrees(math.atan2(-dy_image, dx)) % 360.0
        return cls(bucket=cls.bucket_for(angle), angle_deg=angle)


@dataclass(frozen=True)
class FingerState:
    finger: FingerId
    extended: bool
    direction: Compass8 | None  # None iff not extended
    curl_deg: float  # diagnostic


@dataclass(frozen=True)
class FeatureConfig:
    """Thresholds for the discrete feature set. Distances are in palm widths."""

    curl_extended_deg: float = 60.0
    thumb_bend_deg: float = 40.0
    thumb_tip_center_min: float = 0.7
    group_radius: float = 0.30


DEFAULT_FEATURES = FeatureConfig()

Signature = tuple[
    tuple[bool, ...],
    tuple[CompassBucket | None, ...],
    tuple[tuple[FingerId, ...], ...],
]


@dataclass(frozen=True)
class FeatureSet:
    """Discrete description of one accepted frame.

    `hand_center` and `hand_size` are in raw image coordinates so that
    trajectory measurements between frames stay meaningful; everything
    discrete (extension, buckets, groups) comes from the normalized frame.
    """

    states: tuple[FingerState, ...]  # all five fingers, FingerId order
    groups: tuple[tuple[FingerId, ...], ...]  # partition of extended fingers
    handedness: Handedness
    hand_center: tuple[float, float]
    hand_size: float
    source_timestamp_us: int

    def state(self, finger: FingerId) -> FingerState:
        return self.states[int(finger)]

    def extended_fingers(self) -> tuple[FingerId, ...]:
        return tuple(s.finger for s in self.states if s.extended)

    @property
    def discrete_signature(self) -> Signature:
        """The cache/keyframe identity: extension flags, buckets, groups."""
        return (
            tuple(s.extended for s in self.states),
            tuple(s.direction.bucket if s.direction else None for s in self.states),
            self.groups,
        )


def _bend_deg(a: Point, j: Point, b: Point) -> float:
    """Bend at joint j between chain neighbors a (proximal) and b (distal).

    Angle in degrees between (j - a) and (b - j) in the x-y plane; 0 when
    the chain is collinear.
    """
    ux, uy = j[0] - a[0], j[1] - a[1]
    vx, vy = b[0] - j[0], b[1] - j[1]
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu < MIN_SEGMENT or nv < MIN_SEGMENT:
        raise DegenerateHand("zero-length finger segment")
    cos_a = (ux * vx + uy * vy) / (nu * nv)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos_a))))


def _mean_center(frame: LandmarkFrame) -> tuple[float, float]:
    n = len(frame.points)
    return (
        sum(p[0] for p in frame.points) / n,
        sum(p[1] for p in frame.points) / n,
    )


def finger_extension(
    frame: LandmarkFrame,
    finger: FingerId,
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> tuple[bool, float]:
    """Classify one finger as extended or folded, on a normalized frame.

    Non-thumb fingers: curl is the sum of the bends at the PIP- and
    DIP-equivalent joints; extended iff curl < curl_extended_deg.

    Thumb: single bend at the IP-equivalent joint (index 3) plus a reach
    test, tip farther than thumb_tip_center_min palm widths from the mean
    hand center, so a thumb lying across the palm never counts as extended.
    """
    chain = FINGER_CHAINS[finger]
    p = [frame.point(i) for i in chain]
    if finger is FingerId.Thumb:
        bend = _bend_deg(p[1], p[2], p[3])
        center = _mean_center(frame)
        tip = p[3]
        reach = math.hypot(tip[0] - center[0], tip[1] - center[1])
        extended = bend < cfg.thumb_bend_deg and reach > cfg.thumb_tip_center_min
        return extended, bend
    curl = _bend_deg(p[0], p[1], p[2]) + _bend_deg(p[1], p[2], p[3])
    return curl < cfg.curl_extended_deg, curl


def finger_direction(
    frame: LandmarkFrame,
    finger: FingerId,
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> Compass8:
    """Pointing direction of an extended finger: TIP minus MCP, bucketed."""
    extended, _ = finger_extension(frame, finger, cfg)
    if not extended:
        raise NotExtended(f"{finger.name} is folded into the fist")
    mcp = frame.point(FINGER_MCP[finger])
    tip = frame.point(FINGER_TIP[finger])
    return Compass8.from_vector(tip[0] - mcp[0], tip[1] - mcp[1])


def finger_groups(
    frame: LandmarkFrame,
    states: list[FingerState] | tuple[FingerState, ...],
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> tuple[tuple[FingerId, ...], ...]:
    """Partition extended fingers into proximity groups.

    Edge between two extended fingers iff their tips are closer than
    group_radius palm widths in the x-y plane; groups are the connected
    components. Output order is canonical: groups sorted by their smallest
    member, members sorted by FingerId.
    """
    extended = [s.finger for s in states if s.extended]
    if not extended:
        return ()
    tips = {f: frame.point(FINGER_TIP[f]) for f in extended}

    parent = {f: f for f in extended}

    def find(f: FingerId) -> FingerId:
        while parent[f] is not f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for i, fa in enumerate(extended):
        for fb in extended[i + 1:]:
            if planar_distance(tips[fa], tips[fb]) < cfg.group_radius:
                ra, rb = find(fa), find(fb)
                if ra is not rb:
                    parent[rb] = ra

    components: dict[FingerId, list[FingerId]] = {}
    for f in extended:
        components.setdefault(find(f), []).append(f)
    groups = [tuple(sorted(members)) for members in components.values()]
    groups.sort(key=lambda g: g[0])
    return tuple(groups)


def features_to_record(fs: FeatureSet) -> dict:
    """Diagnostic NDJSON record mirroring the FeatureSet field for field."""
    return {
        "t_us": fs.source_timestamp_us,
        "hand": fs.handedness.value,
        "fingers": [
            {
                "finger": s.finger.name,
                "extended": s.extended,
                "direction": s.direction.bucket.name if s.direction else None,
                "angle_deg": round(s.direction.angle_deg, 3) if s.direction else None,
                "curl_deg": round(s.curl_deg, 3),
            }
            for s in fs.states
        ],
        "groups": [[m.name for m in g] for g in fs.groups],
        "hand_center": [fs.hand_center[0], fs.hand_center[1]],
        "hand_size": fs.hand_size,
    }


def extract_features(
    frame: LandmarkFrame,
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> FeatureSet:
    """Full discrete feature set for one accepted raw frame."""
    size = hand_size(frame)
    norm = normalize(frame)

    states = []
    for finger in FingerId:
        extended, curl = finger_extension(norm, finger, cfg)
        direction = finger_direction(norm, finger, cfg) if extended else None
        states.append(FingerState(finger=finger, extended=extended,
                                  direction=direction, curl_deg=curl))

    return FeatureSet(
        states=tuple(states),
        groups=finger_groups(norm, states, cfg),
        handedness=frame.handedness,
        hand_center=_mean_center(frame),
        hand_size=size,
        source_timestamp_us=frame.timestamp_us,
    )
