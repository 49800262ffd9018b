"""Task text to robot commands: classifier, explainer, mock dispatch.

The classifier does the literal thing: normalize the text and look for a
registered task phrase as a whole-word substring, first registry entry wins.
When nothing matches, the explainer asks the completion backend to rewrite
the task as lines from the closed command vocabulary and classifies each
line; if that fails too, the task is rejected. Every task text therefore
lands in exactly one of Classified / Explained / Rejected.

The mock robot is first-order: moves teleport to the target under speed and
acceleration caps, and the workspace box is enforced before any state
changes, so the pose can never leave the box.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import (
    AdapterUnavailable,
    InterpretationFailed,
    RegistryError,
    WorkspaceViolation,
)


class CubeColor(Enum):
    Red = "Red"
    Green = "Green"
    Blue = "Blue"
    Yellow = "Yellow"


class FigureShape(Enum):
    Circle = "Circle"
    Line = "Line"


@dataclass(frozen=True)
class MoveTo:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PushObject:
    color: CubeColor


@dataclass(frozen=True)
class DrawFigure:
    shape: FigureShape


@dataclass(frozen=True)
class ActivateProgram:
    id: str


@dataclass(frozen=True)
class Stop:
    pass


Command = MoveTo | PushObject | DrawFigure | ActivateProgram | Stop


def command_to_dict(cmd: Command) -> dict:
    if isinstance(cmd, MoveTo):
        return {"type": "move_to", "x": cmd.x, "y": cmd.y, "z": cmd.z}
    if isinstance(cmd, PushObject):
        return {"type": "push_object", "color": cmd.color.value}
    if isinstance(cmd, DrawFigure):
        return {"type": "draw_figure", "shape": cmd.shape.value}
    if isinstance(cmd, ActivateProgram):
        return {"type": "activate_program", "id": cmd.id}
    return {"type": "stop"}


def command_from_dict(raw: dict) -> Command:
    kind = raw.get("type")
    if kind == "move_to":
        return MoveTo(x=float(raw["x"]), y=float(raw["y"]), z=float(raw["z"]))
    if kind == "push_object":
        return PushObject(color=CubeColor(raw["color"]))
    if kind == "draw_figure":
        return DrawFigure(shape=FigureShape(raw["shape"]))
    if kind == "activate_program":
        return ActivateProgram(id=str(raw["id"]))
    if kind == "stop":
        return Stop()
    raise RegistryError(f"unknown command type: {kind!r}")


@dataclass(frozen=True)
class RegistryEntry:
    task_name: str
    synonyms: tuple[str, ...]
    command: Command


@dataclass(frozen=True)
class WorkspaceBox:
    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def contains(self, x: float, y: float, z: float) -> bool:
        return all(lo <= v <= hi for v, lo, hi in zip((x, y, z), self.min, self.max))


@dataclass(frozen=True)
class TaskRegistry:
    entries: tuple[RegistryEntry, ...]
    workspace: WorkspaceBox
    max_speed: float
    max_accel: float


def normalize_text(text: str) -> str:
    """Lowercase, trim, collapse inner whitespace."""
    return re.sub(r"\s+", " ", text.strip().lower())


def load_registry(path: str | Path | None = None) -> TaskRegistry:
    """Load the task registry; without a path, the packaged sample ships
    the study activities (cube pushes, figures, program trigger, stop)."""
    if path is None:
        raw = resources.files("gesturepipe").joinpath("registry.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
        entries = []
        seen = set()
        for item in data["tasks"]:
            name = normalize_text(item["task_name"])
            if name in seen:
                raise RegistryError(f"duplicate task name after normalization: {name!r}")
            seen.add(name)
            entries.append(RegistryEntry(
                task_name=item["task_name"],
                synonyms=tuple(item.get("synonyms", ())),
                command=command_from_dict(item["command"]),
            ))
        box = WorkspaceBox(min=tuple(data["workspace"]["min"]),
                           max=tuple(data["workspace"]["max"]))
        registry = TaskRegistry(entries=tuple(entries), workspace=box,
                                max_speed=float(data["max_speed"]),
                                max_accel=float(data["max_accel"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise RegistryError(f"malformed registry file: {exc}") from exc
    for entry in registry.entries:
        if isinstance(entry.command, MoveTo):
            cmd = entry.command
            if not registry.workspace.contains(cmd.x, cmd.y, cmd.z):
                raise RegistryError(
                    f"registry MoveTo target for {entry.task_name!r} outside workspace")
    return registry


@dataclass(frozen=True)
class Classified:
    command: Command
    matched_task: str


@dataclass(frozen=True)
class Explained:
    commands: tuple[Command, ...]  # non-empty


@dataclass(frozen=True)
class Rejected:
    reason: str


CommandDecision = Classified | Explained | Rejected


def _phrase_in(phrase: str, text: str) -> bool:
    return re.search(rf"(?<!\w){re.escape(phrase)}(?!\w)", text) is not None


def classify(task_text: str, registry: TaskRegistry) -> tuple[Command, str] | None:
    """First registry entry whose name or synonym occurs as a whole-word
    substring of the normalized task text; None when nothing matches."""
    text = normalize_text(task_text)
    for entry in registry.entries:
        for phrase in (entry.task_name, *entry.synonyms):
            if _phrase_in(normalize_text(phrase), text):
                return entry.command, entry.task_name
    return None


EXPLAIN_PROMPT = """\
A robot accepts only these commands:
- move to <x> <y> <z>  (meters, inside the workspace box)
- push the <red|green|blue|yellow> cube
- draw a <circle|line>
- activate the <id> program
- stop

Known task phrases: {task_names}

Rewrite the following task as a list of commands, one per line, using only
the known task phrases. If it cannot be done with these commands, reply with
the single word: impossible.

Task: {task}
"""


def explain(task_text: str, registry: TaskRegistry, gateway) -> CommandDecision:
    """Decompose an unclassified task via one completion; reject otherwise."""
    prompt = EXPLAIN_PROMPT.format(
        task_names="; ".join(e.task_name for e in registry.entries),
        task=task_text,
    )
    try:
        answer = gateway.complete(prompt)
    except InterpretationFailed as exc:
        return Rejected(f"explainer failed: {exc}")
    except Exception as exc:  # timeout/transport surfaced by the backend
        return Rejected(f"explainer failed: {exc}")
    commands = []
    for line in answer.splitlines():
        line = line.strip().lstrip("-*").strip()
        if not line:
            continue
        match = classify(line, registry)
        if match is not None:
            commands.append(match[0])
    if commands:
        return Explained(commands=tuple(commands))
    return Rejected("no executable decomposition")


def decide(task_text: str, registry: TaskRegistry, gateway) -> CommandDecision:
    """Classifier first, explainer second, rejection last; total."""
    match = classify(task_text, registry)
    if match is not None:
        return Classified(command=match[0], matched_task=match[1])
    return explain(task_text, registry, gateway)


@dataclass(frozen=True)
class RobotAck:
    pose: tuple[float, float, float]
    velocity: float
    active_program: str | None
    detail: str


class MockRobot:
    """First-order stand-in for a restricted manipulator.

    Workspace, speed and acceleration caps come from the registry file. The
    box is checked before the pose updates, so the safety invariant (pose
    always inside the box) holds over any command stream.
    """

    HOME = (0.0, 0.0, 0.25)

    def __init__(self, registry: TaskRegistry):
        self.workspace = registry.workspace
        self.max_speed = registry.max_speed
        self.max_accel = registry.max_accel
        self.pose = self.HOME
        self.velocity = 0.0
        self.active_program: str | None = None
        self.available = True
        self.pushed: list[CubeColor] = []
        self.figures: list[FigureShape] = []

    def dispatch(self, cmd: Command) -> RobotAck:
        if not self.available:
            raise AdapterUnavailable("robot adapter is offline")
        if isinstance(cmd, MoveTo):
            if not self.workspace.contains(cmd.x, cmd.y, cmd.z):
                raise WorkspaceViolation(
                    f"target ({cmd.x}, {cmd.y}, {cmd.z}) outside workspace box")
            self.pose = (cmd.x, cmd.y, cmd.z)
            self.velocity = min(self.max_speed, self.max_accel)
            return self._ack(f"moved to {self.pose}")
        if isinstance(cmd, PushObject):
            self.pushed.append(cmd.color)
            self.velocity = min(self.max_speed, self.max_accel)
            return self._ack(f"pushed the {cmd.color.value.lower()} cube")
        if isinstance(cmd, DrawFigure):
            self.figures.append(cmd.shape)
            self.velocity = min(self.max_speed, self.max_accel)
            return self._ack(f"drew a {cmd.shape.value.lower()}")
        if isinstance(cmd, ActivateProgram):
            self.active_program = cmd.id
            return self._ack(f"activated program {cmd.id!r}")
        self.velocity = 0.0
        self.active_program = None
        return self._ack("stopped")

    def _ack(self, detail: str) -> RobotAck:
        return RobotAck(pose=self.pose, velocity=self.velocity,
                        active_program=self.active_program, detail=detail)
