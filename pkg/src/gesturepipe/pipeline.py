"""End-to-end per-session engine: NDJSON line in, pipeline events out.

One GesturePipeline instance owns the state of one session: the keyframe
selector, the interpretation window, cache and gateway handles, and the mock
robot. process_line() runs a frame through parse -> confidence gate ->
features -> keyframe fold; each new keyframe renders the window, consults the
cache (or the gateway on a miss) and routes the task text into a command
decision. Events come back as plain records; transports (service, CLI) wrap
them as they see fit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any

from . import cache as cache_mod
from .errors import (
    DegenerateHand,
    DegenerateVector,
    InterpretationFailed,
    MalformedRecord,
    NonMonotonicTimestamp,
    SchemaViolation,
    WorkspaceViolation,
)
from .features import FeatureConfig, extract_features
from .gateway import BackendKind, Gateway, GestureInterpretation
from .keyframes import Keyframe, KeyframeConfig, KeyframeSelector
from .landmarks import DEFAULT_MIN_CONFIDENCE, accept_frame, parse_frame
from .rendering import DEFAULT_WINDOW_SIZE, ContextDocument, KeyframeWindow
from .router import (
    Classified,
    CommandDecision,
    Explained,
    MockRobot,
    Rejected,
    TaskRegistry,
    command_to_dict,
    decide,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineEvent:
    type: str
    payload: dict[str, Any] = field(default_factory=dict)


def keyframe_summary(kf: Keyframe) -> dict:
    """Keyframe log record: reason, discrete signature, segment fields."""
    fs = kf.features
    record: dict[str, Any] = {
        "t_us": fs.source_timestamp_us,
        "reason": kf.reason.value,
        "hand": fs.handedness.value,
        "fingers": [
            {
                "finger": s.finger.name,
                "extended": s.extended,
                "direction": s.direction.bucket.name if s.direction else None,
            }
            for s in fs.states
        ],
        "groups": [[m.name for m in g] for g in fs.groups],
        "center": [fs.hand_center[0], fs.hand_center[1]],
        "hand_size": fs.hand_size,
    }
    if kf.incoming is None:
        record["segment"] = None
    else:
        seg = kf.incoming
        record["segment"] = {
            "direction": seg.direction.bucket.name if seg.direction else None,
            "magnitude": seg.magnitude.value,
            "displacement": round(seg.displacement, 6),
            "duration_us": seg.duration_us,
        }
    return record


def interpretation_summary(interp: GestureInterpretation) -> dict:
    return {
        "name": interp.name,
        "meaning": interp.meaning,
        "task": interp.task_text,
        "backend": interp.backend.value,
    }


def decision_summary(decision: CommandDecision) -> dict:
    if isinstance(decision, Classified):
        return {"kind": "classified", "matched_task": decision.matched_task,
                "commands": [command_to_dict(decision.command)]}
    if isinstance(decision, Explained):
        return {"kind": "explained",
                "commands": [command_to_dict(c) for c in decision.commands]}
    return {"kind": "rejected", "reason": decision.reason}


@dataclass
class PipelineConfig:
    min_confidence: float = DEFAULT_MIN_CONFIDENCE
    window_size: int = DEFAULT_WINDOW_SIZE
    features: FeatureConfig = field(default_factory=FeatureConfig)
    keyframes: KeyframeConfig = field(default_factory=KeyframeConfig)
    auto_dispatch: bool = True
    route_commands: bool = True
    # Optional few-shot mode: prepend the nearest sub-threshold cache entry
    # to the context before interpretation.
    cache_as_context: bool = False


class GesturePipeline:
    """Single-session engine; sequential use only."""

    def __init__(self, gateway: Gateway, registry: TaskRegistry | None,
                 cache: cache_mod.RecognitionCache | None = None,
                 config: PipelineConfig | None = None):
        self.cfg = config or PipelineConfig()
        self.gateway = gateway
        self.registry = registry
        self.cache = cache
        self.robot = MockRobot(registry) if (registry and self.cfg.route_commands) else None
        self.selector = KeyframeSelector(self.cfg.keyframes)
        self.window = KeyframeWindow(self.cfg.window_size)
        self.frames_seen = 0
        self.frames_rejected = 0
        self.closed = False
        self.last_interpretation: GestureInterpretation | None = None

    # -- frame path ---------------------------------------------------------

    def process_line(self, line: str) -> list[PipelineEvent]:
        """Run one NDJSON landmark record; returns the events it produced."""
        if self.closed:
            return [PipelineEvent("Error", {"stage": "ingest",
                                            "cause": "session stream closed"})]
        try:
            frame = parse_frame(line)
        except (MalformedRecord, SchemaViolation) as exc:
            return [PipelineEvent("Error", {"stage": "parse", "cause": str(exc)})]

        self.frames_seen += 1
        if not accept_frame(frame, self.cfg.min_confidence):
            self.frames_rejected += 1
            return [PipelineEvent("FrameRejected", {
                "t_us": frame.timestamp_us,
                "reason": f"confidence {frame.confidence} below {self.cfg.min_confidence}",
            })]

        events = [PipelineEvent("FrameAccepted", {
            "t_us": frame.timestamp_us,
            "hand": frame.handedness.value,
            "conf": frame.confidence,
            "pts": [[x, y, z] for x, y, z in frame.points],
        })]

        try:
            features = extract_features(frame, self.cfg.features)
        except DegenerateHand as exc:
            events.append(PipelineEvent("Error", {"stage": "features", "cause": str(exc)}))
            return events

        try:
            kf = self.selector.push(features)
        except NonMonotonicTimestamp as exc:
            self.closed = True
            events.append(PipelineEvent("Error", {"stage": "keyframes", "cause": str(exc),
                                                  "fatal": True}))
            return events

        if kf is None:
            return events
        self.window.append(kf)
        events.append(PipelineEvent("KeyframeEmitted", keyframe_summary(kf)))
        events.extend(self._interpret_and_route())
        return events

    # -- interpretation + routing -------------------------------------------

    def _interpret_and_route(self) -> list[PipelineEvent]:
        events: list[PipelineEvent] = []
        ctx = self.window.render()

        vector = None
        if self.cache is not None:
            try:
                vector = cache_mod.embed(ctx)
            except DegenerateVector:
                vector = None  # nothing to key on; skip the cache entirely

        interpretation = None
        if vector is not None:
            hit = self.cache.lookup(vector)
            if hit is not None:
                interpretation = replace(hit.interpretation, backend=BackendKind.Cache)
                events.append(PipelineEvent("CacheHit", {
                    "name": interpretation.name,
                    "task": interpretation.task_text,
                    "hit_count": hit.hit_count,
                }))

        if interpretation is None:
            if self.cfg.cache_as_context and self.cache is not None and vector is not None:
                near = self.cache.best_below_threshold(vector)
                if near is not None:
                    ctx = self._with_exemplar(ctx, near[0])
            try:
                interpretation = self.gateway.interpret(ctx)
            except InterpretationFailed as exc:
                events.append(PipelineEvent("Error", {"stage": exc.stage, "cause": exc.cause}))
                return events
            events.append(PipelineEvent("InterpretationReady", {
                **interpretation_summary(interpretation),
                "latency_us": dict(interpretation.latency_us),
            }))
            if self.cache is not None and vector is not None:
                self.cache.insert(self.cache.make_entry(vector, ctx, interpretation))

        self.last_interpretation = interpretation

        if self.registry is None or not self.cfg.route_commands:
            return events

        decision = decide(interpretation.task_text, self.registry, self.gateway)
        events.extend(self._route_decision(decision, interpretation))
        return events

    @staticmethod
    def _with_exemplar(ctx: ContextDocument, entry) -> ContextDocument:
        exemplar = (
            "A similar gesture was previously interpreted as: "
            f"name={entry.interpretation.name!r}, "
            f"meaning={entry.interpretation.meaning!r}, "
            f"task={entry.interpretation.task_text!r}\n\n"
        )
        return ContextDocument(text=exemplar + ctx.text, window=ctx.window,
                               signature=ctx.signature)

    def _route_decision(self, decision: CommandDecision,
                        interpretation: GestureInterpretation) -> list[PipelineEvent]:
        events: list[PipelineEvent] = []
        summary = decision_summary(decision)
        if isinstance(decision, Rejected):
            events.append(PipelineEvent("CommandRejected", {
                "reason": decision.reason,
                "task": interpretation.task_text,
            }))
            return events
        if not self.cfg.auto_dispatch:
            events.append(PipelineEvent("CommandPending", {
                "decision": summary, "task": interpretation.task_text,
            }))
            return events
        commands = (decision.command,) if isinstance(decision, Classified) \
            else decision.commands
        for cmd in commands:
            events.append(self.dispatch_command(cmd, summary))
        return events

    def dispatch_command(self, cmd, decision_summary_: dict | None = None) -> PipelineEvent:
        assert self.robot is not None
        try:
            ack = self.robot.dispatch(cmd)
        except WorkspaceViolation as exc:
            return PipelineEvent("CommandRejected", {
                "reason": f"WorkspaceViolation: {exc}",
                "command": command_to_dict(cmd),
            })
        return PipelineEvent("CommandDispatched", {
            "command": command_to_dict(cmd),
            "ack": {
                "pose": list(ack.pose),
                "velocity": ack.velocity,
                "active_program": ack.active_program,
                "detail": ack.detail,
            },
            **({"decision": decision_summary_} if decision_summary_ else {}),
        })
