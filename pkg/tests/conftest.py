"""Shared fixtures: synthetic hands, frame builders, scripted backends."""

from __future__ import annotations

import json

import pytest

from gesturepipe.corpus import template_frame, template_points
from gesturepipe.features import extract_features
from gesturepipe.gateway import BackendKind
from gesturepipe.keyframes import KeyframeSelector
from gesturepipe.landmarks import Handedness, LandmarkFrame


def make_frame(points, t_us=0, hand=Handedness.Right, conf=0.9):
    return LandmarkFrame(timestamp_us=t_us, handedness=hand,
                         confidence=conf, points=tuple(points))


def frame_record(frame: LandmarkFrame) -> dict:
    return {
        "t_us": frame.timestamp_us,
        "hand": frame.handedness.value,
        "conf": frame.confidence,
        "pts": [[x, y, z] for x, y, z in frame.points],
    }


def frame_line(frame: LandmarkFrame) -> str:
    return json.dumps(frame_record(frame), separators=(",", ":"))


def features_of(label: str, t_us: int = 0):
    return extract_features(template_frame(label, t_us=t_us))


def single_keyframe_window(label: str):
    """One First keyframe of the given gesture template."""
    selector = KeyframeSelector()
    return [selector.push(features_of(label))]


class ScriptedBackend:
    """Completion backend answering from a fixed queue; fails when told to."""

    kind = BackendKind.Remote

    def __init__(self, answers, fail_at_call: int | None = None,
                 error: Exception | None = None):
        self.answers = list(answers)
        self.fail_at_call = fail_at_call
        self.error = error or RuntimeError("scripted failure")
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        if self.fail_at_call is not None and self.calls == self.fail_at_call:
            raise self.error
        if not self.answers:
            raise AssertionError("scripted backend ran out of answers")
        return self.answers.pop(0)


@pytest.fixture
def vulcan_frame():
    return template_frame("vulcan_salute")


@pytest.fixture
def fist_frame():
    return template_frame("fist")


@pytest.fixture
def open_palm_frame():
    return template_frame("open_palm")
