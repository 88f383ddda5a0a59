"""Exception hierarchy shared across the pipeline.

Errors are split along two axes that callers care about: whether a failure
is worth retrying (transport vs. permanent) and whether it is a data
problem (parse/validation/schema) vs. an operational one.
"""

from __future__ import annotations


class ChatweaveError(Exception):
    """Base class for all package errors."""


class CorpusParseError(ChatweaveError):
    """Raw corpus bytes could not be parsed. Carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class CorpusValidationError(ChatweaveError):
    """A dialogue violates a structural invariant."""

    def __init__(self, dialogue_id: str, turn_index: int | None, rule: str, detail: str = ""):
        where = dialogue_id if turn_index is None else f"{dialogue_id}[turn {turn_index}]"
        super().__init__(f"{where}: {rule}" + (f": {detail}" if detail else ""))
        self.dialogue_id = dialogue_id
        self.turn_index = turn_index
        self.rule = rule


class TransportError(ChatweaveError):
    """Backend unreachable or transiently failing; safe to retry."""


class PermanentBackendError(ChatweaveError):
    """Backend rejected the request; retrying the same request is pointless."""


class ProtocolError(ChatweaveError):
    """Backend answered, but the payload violates the wire contract."""


class SchemaError(ChatweaveError):
    """A record violates the annotation schema."""


class NotFoundError(ChatweaveError):
    """Referenced entity (candidate, task) does not exist."""


class UndefinedAgreementError(ChatweaveError):
    """Agreement statistic is undefined for the given ratings."""


class InsufficientDataError(ChatweaveError):
    """Fewer qualifying items than requested."""

    def __init__(self, message: str, available: int):
        super().__init__(f"{message} ({available} available)")
        self.available = available


class InfeasibleError(ChatweaveError):
    """The requested target cannot be reached from the given inputs."""


class UnparseableError(ChatweaveError):
    """Generated text carries no recognizable structure."""
