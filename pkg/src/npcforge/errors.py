"""Exception vocabulary shared across the pipeline.

Every error the package raises on purpose derives from ForgeError, so
callers (CLI, HTTP service) can map failures to exit codes and status
codes in one place.
"""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for all npcforge errors."""


class InvariantViolation(ForgeError, ValueError):
    """A domain value was constructed with data that breaks its invariants."""


class TooShort(ForgeError):
    """Character description below the minimum trimmed length."""

    def __init__(self, actual_length: int, minimum: int) -> None:
        super().__init__(f"description has {actual_length} characters after trimming, need at least {minimum}")
        self.actual_length = actual_length
        self.minimum = minimum


class EnumOutOfRange(ForgeError, ValueError):
    """A trait value outside its three-member enum."""

    def __init__(self, field: str, value: str) -> None:
        super().__init__(f"{field}: {value!r} is not an allowed value")
        self.field = field
        self.value = value


class UnknownField(ForgeError):
    """A trait edit addressed a field path that does not exist."""

    def __init__(self, field_path: str) -> None:
        super().__init__(f"unknown field path: {field_path}")
        self.field_path = field_path


# gateway

class ProviderConnectionError(ForgeError):
    """The chat or embedding backend could not be reached or answered abnormally."""


class ProviderRefusal(ForgeError):
    """The backend answered but declined to produce content."""


class ConfigurationError(ForgeError):
    """The requested provider mode cannot be constructed (missing credential, missing store)."""


class ExhaustedRetries(ForgeError):
    """The attempt budget for one logical request ran out."""

    def __init__(self, attempts: int, last_error: Exception | None) -> None:
        detail = f": {last_error}" if last_error is not None else ""
        super().__init__(f"gave up after {attempts} attempts{detail}")
        self.attempts = attempts
        self.last_error = last_error


class Unrepairable(ForgeError):
    """Model output that cannot be coerced or repaired into an acceptable document."""


class RejectedOutput(ForgeError):
    """A structurally parsed model reply that fails stage validation; consumes one attempt."""


class FixtureMiss(ForgeError):
    """Replay mode was asked for a request that has no recorded fixture."""

    def __init__(self, request_hash: str) -> None:
        super().__init__(f"no fixture recorded for request {request_hash}")
        self.request_hash = request_hash


class StageFailure(ForgeError):
    """A pipeline stage gave up; carries the stage name and the final cause."""

    def __init__(self, stage: str, cause: Exception | None = None) -> None:
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"{stage} stage failed{detail}")
        self.stage = stage
        self.cause = cause


# gift matching

class DimensionMismatch(ForgeError):
    """Cosine similarity over vectors of different lengths."""


class ZeroVector(ForgeError):
    """Cosine similarity against an all-zero vector is undefined."""


class CatalogTooSmall(ForgeError):
    """Fewer catalog items than the requested top-k."""


class EmptyKeywordSet(ForgeError):
    """No taste keywords could be extracted from the personality text."""


# emitter

class BadVersion(ForgeError):
    """Manifest version string is not MAJOR.MINOR.PATCH."""


class DanglingReference(ForgeError):
    """A document references a file that is not part of the pack."""


class IoFailure(ForgeError):
    """Packaging could not write to the target."""


# session

class UnknownSession(ForgeError):
    """No session with the given id."""


class WrongStage(ForgeError):
    """Operation not allowed in the session's current stage."""

    def __init__(self, operation: str, stage: str) -> None:
        super().__init__(f"{operation} is not allowed in stage {stage}")
        self.operation = operation
        self.stage = stage


class BadSlot(ForgeError):
    """Highlight slot index outside 0..2."""


class PinnedSlot(ForgeError):
    """Regeneration requested for a pinned highlight slot."""


class WrongDirection(ForgeError):
    """A back-jump targeted the current or a later stage."""


class SessionBusy(ForgeError):
    """A mutation arrived while a background stage run holds the session."""


class CorruptStore(ForgeError):
    """Snapshot store exists but cannot be decoded."""
