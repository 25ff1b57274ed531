"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TriagentError(Exception):
    """Base class for all package errors."""


# data model
class MissingField(TriagentError):
    def __init__(self, field: str) -> None:
        super().__init__(f"missing required field: {field!r}")
        self.field = field


class EmptyDocument(TriagentError):
    pass


class SchemaViolation(TriagentError):
    pass


class DuplicateRecord(TriagentError):
    pass


# metrics / reward / oracle
class InvalidN(TriagentError):
    pass


class ExternalExtractorUnavailable(TriagentError):
    pass


class EmptyReference(TriagentError):
    pass


class UnparseableInstruction(TriagentError):
    pass


class InvalidOps(TriagentError):
    pass


# agents
class EmptyInstruction(TriagentError):
    pass


class EmptyPool(TriagentError):
    pass


class BudgetTooSmall(TriagentError):
    pass


class BackendError(TriagentError):
    pass


class BackendTimeout(BackendError):
    pass


class BackendRejected(BackendError):
    def __init__(self, status: int, body: str) -> None:
        super().__init__(f"backend rejected request with HTTP {status}: {body[:500]}")
        self.status = status
        self.body = body


class NoScriptedResponse(BackendError):
    pass


# pipeline / trainer
class RecordError(TriagentError):
    """An agent failure attributed to a single dataset record."""

    def __init__(self, record_id: str, cause: BaseException) -> None:
        super().__init__(f"record {record_id}: {type(cause).__name__}: {cause}")
        self.record_id = record_id
        self.cause = cause


class FatalConfigError(TriagentError):
    pass


class CorruptTrace(TriagentError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"corrupt trace at line {line}: {reason}")
        self.line = line


class EmptyTrainingSet(TriagentError):
    pass
