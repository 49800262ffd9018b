"""Hand tracker adapters.

The bridge only needs one thing from a tracker: given a BGR frame, either a
Detection (handedness, score, 21 points) or None. All geometry and feature
logic lives downstream, so swapping the tracking framework is a one-class
change here.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Detection:
    handedness: str  # "Left" | "Right"
    score: float
    points: list[tuple[float, float, float]]  # 21 entries, normalized x/y


class MediaPipeTracker:
    """Adapter over the MediaPipe Hands solution. Imported lazily so the
    bridge (and its tests) work on machines without the model runtime."""

    def __init__(self, min_confidence: float = 0.5):
        import mediapipe as mp  # deferred: heavyweight optional dependency

        self._mp = mp
        self._hands = mp.solutions.hands.Hands(
            static_image_mode=False,
            max_num_hands=1,
            min_detection_confidence=min_confidence,
            min_tracking_confidence=min_confidence,
        )

    def detect(self, frame_bgr) -> Detection | None:
        import cv2

        result = self._hands.process(cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB))
        if not result.multi_hand_landmarks:
            return None
        landmarks = result.multi_hand_landmarks[0].landmark
        if result.multi_handedness:
            label = result.multi_handedness[0].classification[0].label
            score = result.multi_handedness[0].classification[0].score
        else:
            label, score = "Right", 0.5
        if label not in ("Left", "Right"):
            return None
        return Detection(
            handedness=label,
            score=float(score),
            points=[(lm.x, lm.y, lm.z) for lm in landmarks],
        )

    def close(self) -> None:
        self._hands.close()
