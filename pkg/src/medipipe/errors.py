"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class MedipipeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MedipipeError):
    """Input violates a documented precondition or invariant."""


class StateError(MedipipeError):
    """Operation not allowed in the object's current state."""


class OrderingError(ValidationError):
    """Segment ordering violated beyond the allowed jitter tolerance."""


class EmptySessionError(ValidationError):
    """Session has no segments where at least one is required."""


class ConfigError(ValidationError):
    """Invalid configuration value."""


class ParseError(MedipipeError):
    """Text could not be parsed into the expected structure.

    Carries the offending raw text so callers can log or surface it.
    """

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class CorpusLoadError(MedipipeError):
    """A corpus record could not be read from disk."""

    def __init__(self, message: str, record_id: str = ""):
        super().__init__(message)
        self.record_id = record_id


class DimensionError(ValidationError):
    """Vector dimension does not match the index dimension."""


class FormatError(MedipipeError):
    """Persisted index file is corrupt, truncated, or unrecognized.

    ``byte_offset`` points at the position where decoding failed.
    """

    def __init__(self, message: str, byte_offset: int = 0):
        super().__init__(f"{message} (at byte {byte_offset})")
        self.byte_offset = byte_offset


class ReportError(MedipipeError):
    """Evaluation report cannot be rendered (e.g. duplicate system names)."""


class ProviderError(MedipipeError):
    """A model provider call failed.

    ``stage`` tags which pipeline stage failed ("embed", "search",
    "generate", "transcribe") when known; ``retryable`` marks transient
    transport failures.
    """

    def __init__(self, message: str, stage: str = "", retryable: bool = False):
        super().__init__(message)
        self.stage = stage
        self.retryable = retryable


class TransportError(ProviderError):
    """Network-level failure talking to a provider endpoint."""

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message, stage=stage, retryable=True)


class ProtocolError(ProviderError):
    """Provider responded but the payload violates the wire contract."""
