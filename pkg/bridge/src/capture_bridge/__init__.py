"""Webcam hand-tracking bridge: camera frames to NDJSON landmark records."""

from .bridge import (
    BridgeConfig,
    ServiceEmitter,
    StdoutEmitter,
    detection_to_record,
    record_to_line,
    run_bridge,
)
from .trackers import Detection

__all__ = [
    "BridgeConfig",
    "Detection",
    "ServiceEmitter",
    "StdoutEmitter",
    "detection_to_record",
    "record_to_line",
    "run_bridge",
]
