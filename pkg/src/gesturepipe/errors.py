"""Exception types shared across the pipeline.

All pipeline errors derive from PipelineError so callers that want to keep a
session alive (service, replay) can catch one base class while letting
programming errors propagate.
"""


class PipelineError(Exception):
    """Base class for all recoverable pipeline errors."""


class MalformedRecord(PipelineError):
    """A wire record is not valid JSON / not an object."""


class SchemaViolation(PipelineError):
    """A wire record parsed but violates the landmark schema.

    The message starts with the offending field path, e.g. "pts[3].x".
    """


class DegenerateHand(PipelineError):
    """Hand geometry too collapsed to measure (zero palm width or segment)."""


class NotExtended(PipelineError):
    """Direction requested for a finger that is folded into the fist."""


class NonMonotonicTimestamp(PipelineError):
    """Frame timestamps must strictly increase within a session."""


class EmptyWindow(PipelineError):
    """Context rendering requires at least one keyframe."""


class MissingPriorAnswer(PipelineError):
    """A prompt stage was rendered without the answers it builds on."""


class DegenerateVector(PipelineError):
    """All feature indicators are zero; the vector cannot be normalized."""


class InterpretationFailed(PipelineError):
    """The interpretation chain failed at a stage, after retries."""

    def __init__(self, stage: str, cause: str):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


class MalformedResponse(PipelineError):
    """Completion backend answered with an unusable body."""


class RateLimited(PipelineError):
    """Completion backend returned HTTP 429."""


class TransportError(PipelineError):
    """Completion backend unreachable or returned a server error."""


class CompletionTimeout(PipelineError):
    """Completion backend did not answer within the configured timeout."""


class WorkspaceViolation(PipelineError):
    """A MoveTo target lies outside the configured workspace box."""


class AdapterUnavailable(PipelineError):
    """The robot adapter is not accepting commands."""


class UnknownCommandId(PipelineError):
    """Command id is not pending in this session."""


class RegistryError(PipelineError):
    """Task registry file is malformed or violates uniqueness rules."""


class CorpusLayoutError(PipelineError):
    """Benchmark corpus directory does not match <dir>/<label>/<id>.ndjson."""
