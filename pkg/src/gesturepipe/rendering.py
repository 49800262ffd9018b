"""Deterministic text rendering of keyframe windows and staged prompts.

The context document is the bridge between geometry and language: a byte-stable
plain-text description of the last few keyframes. Phrasing is fixed so that
equal discrete signatures always render to identical bytes (the cache keys off
this determinism). Raw angles never appear, only bucket words; the sole float
in the text is the trajectory displacement, rounded to 2 decimals.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import EmptyWindow, MissingPriorAnswer
from .features import DIRECTION_WORDS, FingerId
from .keyframes import Keyframe, MagnitudeClass

DEFAULT_WINDOW_SIZE = 4

FINGER_WORDS = {
    FingerId.Thumb: "thumb",
    FingerId.Index: "index",
    FingerId.Middle: "middle",
    FingerId.Ring: "ring",
    FingerId.Pinky: "pinky",
}

MAGNITUDE_WORDS = {
    MagnitudeClass.Small: "a small",
    MagnitudeClass.Medium: "a medium",
    MagnitudeClass.Large: "a large",
}


class PromptStage(Enum):
    Name = "name"
    Meaning = "meaning"
    Task = "task"


# Earlier stages whose answers each stage's template substitutes.
STAGE_PRIORS: dict[PromptStage, tuple[PromptStage, ...]] = {
    PromptStage.Name: (),
    PromptStage.Meaning: (PromptStage.Name,),
    PromptStage.Task: (PromptStage.Name, PromptStage.Meaning),
}


@dataclass(frozen=True)
class ContextDocument:
    text: str
    window: tuple[Keyframe, ...]
    signature: tuple  # concatenated discrete signatures of the window


def _finger_list(fingers: tuple[FingerId, ...]) -> str:
    words = [FINGER_WORDS[f] for f in fingers]
    if len(words) == 1:
        return words[0]
    return ", ".join(words[:-1]) + " and " + words[-1]


def _render_keyframe(index: int, kf: Keyframe) -> list[str]:
    fs = kf.features
    lines = [f"Observation {index} ({fs.handedness.value.lower()} hand):"]
    for state in fs.states:
        word = FINGER_WORDS[state.finger]
        noun = word if state.finger is FingerId.Thumb else f"{word} finger"
        if state.extended:
            direction = DIRECTION_WORDS[state.direction.bucket]
            lines.append(f"- the {noun} is extended, pointing {direction}")
        else:
            lines.append(f"- the {noun} is folded into the fist")
    for group in fs.groups:
        if len(group) >= 2:
            lines.append(f"- fingers {_finger_list(group)} are held together")
    seg = kf.incoming
    if seg is not None:
        if seg.magnitude is MagnitudeClass.Still:
            lines.append("- hand stayed still")
        else:
            direction = DIRECTION_WORDS[seg.direction.bucket]
            lines.append(
                f"- hand moved {direction}, {MAGNITUDE_WORDS[seg.magnitude]} distance"
                f" ({seg.displacement:.2f} palm widths)"
            )
    return lines


def render_context(window: list[Keyframe] | tuple[Keyframe, ...]) -> ContextDocument:
    """Render a chronologically ordered keyframe window to canonical text."""
    if not window:
        raise EmptyWindow("cannot render an empty keyframe window")
    blocks = []
    for i, kf in enumerate(window, start=1):
        blocks.append("\n".join(_render_keyframe(i, kf)))
    return ContextDocument(
        text="\n\n".join(blocks),
        window=tuple(window),
        signature=tuple(kf.features.discrete_signature for kf in window),
    )


class KeyframeWindow:
    """The interpretation window: the last W keyframes, oldest dropped."""

    def __init__(self, size: int = DEFAULT_WINDOW_SIZE):
        self._frames: deque[Keyframe] = deque(maxlen=size)

    def append(self, kf: Keyframe) -> None:
        self._frames.append(kf)

    def keyframes(self) -> tuple[Keyframe, ...]:
        return tuple(self._frames)

    def __len__(self) -> int:
        return len(self._frames)

    def render(self) -> ContextDocument:
        return render_context(self.keyframes())


class PromptLibrary:
    """Stage templates, shipped as versioned assets and overridable by a
    directory of <stage>.txt files with the same slot names."""

    def __init__(self, template_dir: str | Path | None = None):
        self._dir = Path(template_dir) if template_dir else None
        self._cache: dict[str, str] = {}

    def _load(self, stem: str) -> str:
        if stem not in self._cache:
            if self._dir is not None:
                text = (self._dir / f"{stem}.txt").read_text(encoding="utf-8")
            else:
                ref = resources.files("gesturepipe").joinpath(f"templates/v1/{stem}.txt")
                text = ref.read_text(encoding="utf-8")
            self._cache[stem] = text
        return self._cache[stem]

    def render_prompt(self, stage: PromptStage, ctx: ContextDocument,
                      prior: dict[PromptStage, str]) -> str:
        for needed in STAGE_PRIORS[stage]:
            if needed not in prior or not prior[needed]:
                raise MissingPriorAnswer(
                    f"stage {stage.name} needs the {needed.name} answer first")
        template = self._load(stage.value)
        slots = {"context": ctx.text}
        if PromptStage.Name in prior:
            slots["name"] = prior[PromptStage.Name]
        if PromptStage.Meaning in prior:
            slots["meaning"] = prior[PromptStage.Meaning]
        return template.format(**slots)

    def render_direct_prompt(self, ctx: ContextDocument) -> str:
        return self._load("direct").format(context=ctx.text)


def render_prompt(stage: PromptStage, ctx: ContextDocument,
                  prior: dict[PromptStage, str],
                  library: PromptLibrary | None = None) -> str:
    """Module-level convenience over a default PromptLibrary."""
    return (library or PromptLibrary()).render_prompt(stage, ctx, prior)
