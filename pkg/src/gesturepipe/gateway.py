"""Staged gesture interpretation: Name -> Meaning -> Task.

Two completion backends ship with the package:

- RemoteBackend speaks the de-facto chat-completions HTTP+JSON protocol
  (POST with a bearer token and a messages array), so any compatible server
  works. 429s and transport failures are retried with exponential backoff.

- RulesBackend is a deterministic offline stand-in: it never calls a model.
  Interpretation pattern-matches the latest keyframe's discrete signature
  against a small table of well-known gestures, which makes the whole
  pipeline a pure function of its input and keeps the benchmark suite
  network-free.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from enum import Enum

import httpx

from .errors import (
    CompletionTimeout,
    InterpretationFailed,
    MalformedResponse,
    RateLimited,
    TransportError,
)
from .features import FingerId
from .rendering import ContextDocument, PromptLibrary, PromptStage

logger = logging.getLogger(__name__)

API_TOKEN_ENV = "GESTUREPIPE_API_TOKEN"


class BackendKind(Enum):
    Remote = "Remote"
    Rules = "Rules"
    Cache = "Cache"


@dataclass(frozen=True)
class GestureInterpretation:
    name: str
    meaning: str
    task_text: str
    backend: BackendKind
    latency_us: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = "http://127.0.0.1:8000/v1/chat/completions"
    model: str = "local-model"
    timeout_s: float = 30.0
    max_retries: int = 2
    backoff_base_s: float = 1.0
    temperature: float = 0.0
    max_tokens: int | None = 256

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class RemoteBackend:
    """Chat-completions client with retry/backoff. Counts every HTTP call."""

    kind = BackendKind.Remote

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        self.calls = 0
        self._client = httpx.Client(timeout=cfg.timeout_s)

    def close(self) -> None:
        self._client.close()

    def _request_once(self, prompt: str) -> str:
        payload = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        }
        if self.cfg.max_tokens is not None:
            payload["max_tokens"] = self.cfg.max_tokens
        headers = {}
        token = os.environ.get(API_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self.calls += 1
        try:
            response = self._client.post(self.cfg.endpoint, json=payload, headers=headers)
        except httpx.TimeoutException as exc:
            raise CompletionTimeout(f"no answer within {self.cfg.timeout_s}s") from exc
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code == 429:
            raise RateLimited("backend returned 429")
        if response.status_code >= 500:
            raise TransportError(f"backend returned {response.status_code}")
        if response.status_code != 200:
            raise MalformedResponse(
                f"backend returned {response.status_code}: {response.text[:200]}")
        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response body: {exc}") from exc
        if not isinstance(text, str):
            raise MalformedResponse("message content is not text")
        return text

    def complete(self, prompt: str) -> str:
        """First message text from the backend; retried on 429/transport."""
        attempt = 0
        while True:
            try:
                return self._request_once(prompt)
            except (RateLimited, TransportError, CompletionTimeout) as exc:
                if attempt >= self.cfg.max_retries:
                    raise
                delay = self.cfg.backoff_base_s * (2 ** attempt)
                logger.warning("completion attempt %d failed (%s); retrying in %.1fs",
                               attempt + 1, exc, delay)
                time.sleep(delay)
                attempt += 1


# Rule table for the offline backend: meaning and task text keyed by the
# gesture name the signature rules produce.
RULE_TABLE: dict[str, tuple[str, str]] = {
    "Vulcan salute": (
        "a salute wishing the other party well",
        "activate the greeting program",
    ),
    "shaka sign": (
        "a relaxed friendly greeting",
        "draw a circle in the air",
    ),
    "finger gun": (
        "a playful aim-and-shoot point",
        "push the red cube",
    ),
    "sign of the horns": (
        "an energetic rock-on salute",
        "draw a line in the air",
    ),
    "open palm": (
        "a raised open hand asking to halt",
        "stop",
    ),
    "fist": (
        "a closed fist signalling hold",
        "hold position",
    ),
    "unknown gesture": (
        "no conventional meaning recognized",
        "no supported task",
    ),
}


def match_gesture_name(signature) -> str:
    """Map one discrete signature to a gesture name.

    The four zero-shot study gestures are mutually exclusive over the whole
    signature space; open palm and fist cover the easy extremes; anything
    else is reported as unknown.
    """
    extended_flags, _buckets, groups = signature
    extended = {FingerId(i) for i, flag in enumerate(extended_flags) if flag}
    group_set = set(groups)
    T, I, M, R, P = FingerId

    if extended == {T, I, M, R, P} and group_set == {(T,), (I, M), (R, P)}:
        return "Vulcan salute"
    if extended == {T, P} and group_set == {(T,), (P,)}:
        return "shaka sign"
    if extended == {T, I}:
        return "finger gun"
    if extended - {T} == {I, P}:
        return "sign of the horns"
    if extended == {T, I, M, R, P} and all(len(g) == 1 for g in group_set):
        return "open palm"
    if not extended:
        return "fist"
    return "unknown gesture"


class RulesBackend:
    """Deterministic signature-matching backend; needs no network.

    complete() exists so the command explainer has something to call; it
    always declines, which keeps unknown tasks on the rejection path.
    """

    kind = BackendKind.Rules

    def __init__(self):
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        return "impossible"


def rule_interpret(ctx: ContextDocument) -> GestureInterpretation:
    """Interpretation from the latest keyframe's discrete signature."""
    latest = ctx.window[-1]
    name = match_gesture_name(latest.features.discrete_signature)
    meaning, task = RULE_TABLE[name]
    return GestureInterpretation(
        name=name, meaning=meaning, task_text=task, backend=BackendKind.Rules)


def _strip_answer(text: str) -> str:
    return text.strip().strip('"“”\'').strip()


class Gateway:
    """Runs the interpretation chain against a pluggable backend.

    `interpretations` counts interpret() runs that actually consulted the
    backend; the recognition cache asserts this stays flat on warm replays.
    """

    def __init__(self, backend, library: PromptLibrary | None = None,
                 staged: bool = True):
        self.backend = backend
        self.library = library or PromptLibrary()
        self.staged = staged
        self.interpretations = 0

    def complete(self, prompt: str) -> str:
        """Raw completion passthrough (used by the command explainer)."""
        return self.backend.complete(prompt)

    def interpret(self, ctx: ContextDocument) -> GestureInterpretation:
        self.interpretations += 1
        if self.backend.kind is BackendKind.Rules:
            return rule_interpret(ctx)
        if not self.staged:
            return self._interpret_direct(ctx)
        return self._interpret_staged(ctx)

    def _run_stage(self, stage: PromptStage, ctx: ContextDocument,
                   prior: dict[PromptStage, str],
                   latency_us: dict) -> str:
        prompt = self.library.render_prompt(stage, ctx, prior)
        started = time.monotonic()
        try:
            raw = self.backend.complete(prompt)
        except Exception as exc:
            raise InterpretationFailed(stage.name, str(exc)) from exc
        latency_us[stage.name] = int((time.monotonic() - started) * 1e6)
        answer = _strip_answer(raw)
        if not answer:
            raise InterpretationFailed(stage.name, "backend returned empty text")
        return answer

    def _interpret_staged(self, ctx: ContextDocument) -> GestureInterpretation:
        latency_us: dict = {}
        prior: dict[PromptStage, str] = {}
        for stage in (PromptStage.Name, PromptStage.Meaning, PromptStage.Task):
            prior[stage] = self._run_stage(stage, ctx, prior, latency_us)
        return GestureInterpretation(
            name=prior[PromptStage.Name],
            meaning=prior[PromptStage.Meaning],
            task_text=prior[PromptStage.Task],
            backend=self.backend.kind,
            latency_us=latency_us,
        )

    def _interpret_direct(self, ctx: ContextDocument) -> GestureInterpretation:
        """Single-prompt comparison mode; less robust, off by default."""
        prompt = self.library.render_direct_prompt(ctx)
        started = time.monotonic()
        try:
            raw = self.backend.complete(prompt)
        except Exception as exc:
            raise InterpretationFailed("Task", str(exc)) from exc
        latency = {"Task": int((time.monotonic() - started) * 1e6)}
        task = _strip_answer(raw)
        if not task:
            raise InterpretationFailed("Task", "backend returned empty text")
        return GestureInterpretation(
            name="(direct mode)", meaning="(direct mode)", task_text=task,
            backend=self.backend.kind, latency_us=latency)
