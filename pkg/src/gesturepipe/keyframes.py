"""Keyframe selection and inter-keyframe trajectory description.

Not every accepted frame goes downstream: a frame is promoted to a keyframe
when the discrete features change, when the hand has moved far since the last
keyframe, or when enough time has passed (so a held gesture is periodically
re-asserted). Motion between consecutive keyframes is summarized as a
direction bucket plus a magnitude class, measured on the hand center in units
of the earlier keyframe's palm width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import NonMonotonicTimestamp
from .features import Compass8, FeatureSet


class MagnitudeClass(Enum):
    Still = "Still"
    Small = "Small"
    Medium = "Medium"
    Large = "Large"


class KeyframeReason(Enum):
    First = "First"
    FeatureChange = "FeatureChange"
    Displacement = "Displacement"
    Timeout = "Timeout"


@dataclass(frozen=True)
class KeyframeConfig:
    """Trigger thresholds. Displacements are in palm widths of the earlier
    keyframe; bands are lower-bound inclusive."""

    displacement_trigger: float = 0.5
    timeout_us: int = 1_000_000
    still_below: float = 0.1
    medium_from: float = 0.5
    large_from: float = 1.5


DEFAULT_KEYFRAMES = KeyframeConfig()


@dataclass(frozen=True)
class TrajectorySegment:
    direction: Compass8 | None  # None iff magnitude is Still
    magnitude: MagnitudeClass
    displacement: float
    duration_us: int


@dataclass(frozen=True)
class Keyframe:
    features: FeatureSet
    incoming: TrajectorySegment | None  # None iff reason is First
    reason: KeyframeReason

    @property
    def timestamp_us(self) -> int:
        return self.features.source_timestamp_us


def _center_displacement(prev: FeatureSet, curr: FeatureSet) -> float:
    dx = curr.hand_center[0] - prev.hand_center[0]
    dy = curr.hand_center[1] - prev.hand_center[1]
    return math.hypot(dx, dy) / prev.hand_size


def trajectory_segment(prev: Keyframe, curr: FeatureSet,
                       cfg: KeyframeConfig = DEFAULT_KEYFRAMES) -> TrajectorySegment:
    """Summarize hand-center motion from the previous keyframe to `curr`."""
    if curr.source_timestamp_us <= prev.timestamp_us:
        raise NonMonotonicTimestamp(
            f"{curr.source_timestamp_us} not after {prev.timestamp_us}")
    disp = _center_displacement(prev.features, curr)
    duration = curr.source_timestamp_us - prev.timestamp_us
    if disp < cfg.still_below:
        return TrajectorySegment(None, MagnitudeClass.Still, disp, duration)
    if disp < cfg.medium_from:
        magnitude = MagnitudeClass.Small
    elif disp < cfg.large_from:
        magnitude = MagnitudeClass.Medium
    else:
        magnitude = MagnitudeClass.Large
    dx = curr.hand_center[0] - prev.features.hand_center[0]
    dy = curr.hand_center[1] - prev.features.hand_center[1]
    return TrajectorySegment(Compass8.from_vector(dx, dy), magnitude, disp, duration)


def is_keyframe(last: Keyframe, candidate: FeatureSet,
                cfg: KeyframeConfig = DEFAULT_KEYFRAMES) -> tuple[bool, KeyframeReason | None]:
    """Decide whether `candidate` becomes a keyframe, and why.

    Rules in priority order: discrete signature changed; hand center moved
    more than displacement_trigger palm widths since the last keyframe;
    more than timeout_us elapsed. The displacement rule runs on the hand
    center because that is the position FeatureSet carries (and it is
    smoother than any single joint under finger articulation).
    """
    if candidate.source_timestamp_us <= last.timestamp_us:
        raise NonMonotonicTimestamp(
            f"{candidate.source_timestamp_us} not after {last.timestamp_us}")
    if candidate.discrete_signature != last.features.discrete_signature:
        return True, KeyframeReason.FeatureChange
    if _center_displacement(last.features, candidate) > cfg.displacement_trigger:
        return True, KeyframeReason.Displacement
    if candidate.source_timestamp_us - last.timestamp_us > cfg.timeout_us:
        return True, KeyframeReason.Timeout
    return False, None


class KeyframeSelector:
    """Streaming keyframe fold for one session.

    push() returns the emitted keyframe or None. The first frame is always a
    keyframe; timestamps must strictly increase across *all* pushed frames.
    """

    def __init__(self, cfg: KeyframeConfig = DEFAULT_KEYFRAMES):
        self.cfg = cfg
        self.last_keyframe: Keyframe | None = None
        self._last_seen_us: int | None = None

    def push(self, features: FeatureSet) -> Keyframe | None:
        ts = features.source_timestamp_us
        if self._last_seen_us is not None and ts <= self._last_seen_us:
            raise NonMonotonicTimestamp(f"{ts} not after {self._last_seen_us}")
        self._last_seen_us = ts

        if self.last_keyframe is None:
            kf = Keyframe(features=features, incoming=None, reason=KeyframeReason.First)
            self.last_keyframe = kf
            return kf

        promote, reason = is_keyframe(self.last_keyframe, features, self.cfg)
        if not promote:
            return None
        segment = trajectory_segment(self.last_keyframe, features, self.cfg)
        kf = Keyframe(features=features, incoming=segment, reason=reason)
        self.last_keyframe = kf
        return kf


def select_keyframes(frames: Iterable[FeatureSet],
                     cfg: KeyframeConfig = DEFAULT_KEYFRAMES) -> Iterator[Keyframe]:
    """Fold a whole feature stream into its keyframe subsequence."""
    selector = KeyframeSelector(cfg)
    for features in frames:
        kf = selector.push(features)
        if kf is not None:
            yield kf
