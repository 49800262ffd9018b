"""Gesture-to-command pipeline over 21-point hand landmark streams."""

from .errors import PipelineError
from .landmarks import (
    FingerId,
    Handedness,
    LandmarkFrame,
    accept_frame,
    hand_size,
    normalize,
    parse_frame,
    serialize_frame,
)
from .features import Compass8, CompassBucket, FeatureSet, FingerState, extract_features
from .keyframes import Keyframe, KeyframeSelector, TrajectorySegment, select_keyframes
from .rendering import ContextDocument, KeyframeWindow, PromptStage, render_context
from .gateway import BackendConfig, Gateway, GestureInterpretation, RemoteBackend, RulesBackend
from .cache import RecognitionCache, cosine, embed
from .router import CommandDecision, MockRobot, TaskRegistry, classify, decide, load_registry
from .pipeline import GesturePipeline, PipelineConfig

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "Compass8",
    "CompassBucket",
    "CommandDecision",
    "ContextDocument",
    "FeatureSet",
    "FingerId",
    "FingerState",
    "Gateway",
    "GestureInterpretation",
    "GesturePipeline",
    "Handedness",
    "Keyframe",
    "KeyframeSelector",
    "KeyframeWindow",
    "LandmarkFrame",
    "MockRobot",
    "PipelineConfig",
    "PipelineError",
    "PromptStage",
    "RecognitionCache",
    "RemoteBackend",
    "RulesBackend",
    "TaskRegistry",
    "TrajectorySegment",
    "accept_frame",
    "classify",
    "cosine",
    "decide",
    "embed",
    "extract_features",
    "hand_size",
    "load_registry",
    "normalize",
    "parse_frame",
    "render_context",
    "select_keyframes",
    "serialize_frame",
]
