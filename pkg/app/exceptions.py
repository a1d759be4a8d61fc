"""
Domain Exceptions
=================

Description: Error hierarchy shared by services, CLI and HTTP handlers
Version: 1.0.0

Every error carries the HTTP status used by the global FastAPI handler and the
process exit code used by the CLI (1 = validation failure, 2 = internal
invariant violation).
"""

from typing import Any, Iterable, Optional


class SimplificationError(Exception):
    http_status = 422
    exit_code = 1

    def __init__(self, message: str, cells: Optional[Iterable[str]] = None, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.cells = tuple(cells) if cells else ()
        self.detail = detail

    def to_dict(self) -> dict:
        body = {"error": self.message}
        if self.cells:
            body["cells"] = list(self.cells)
        if self.detail is not None:
            body["detail"] = self.detail
        return body


class DocumentError(SimplificationError):
    """Malformed document, dangling reference or unknown output format."""
    http_status = 400


class ValidationFailed(SimplificationError):
    """A complex or a discrete Morse function failed validation."""


class MissingValueError(SimplificationError):
    pass


class NotGradientError(SimplificationError):
    pass


class NotCriticalError(SimplificationError):
    pass


class NotReversibleError(SimplificationError):
    pass


class NotShallowError(SimplificationError):
    pass


class AdjacencyError(SimplificationError):
    pass


class TranspositionPreconditionError(SimplificationError):
    pass


class MoveSpecError(SimplificationError):
    pass


class CriterionHypothesisError(SimplificationError):
    pass


class BudgetExceededError(SimplificationError):
    pass


class IneligiblePairError(SimplificationError):
    http_status = 409


class NoGapError(SimplificationError):
    http_status = 409


class UnknownPairError(SimplificationError):
    http_status = 404


class SessionNotFoundError(SimplificationError):
    http_status = 404


class StoreExhaustedError(SimplificationError):
    http_status = 503


class OracleScaleExceeded(SimplificationError):
    http_status = 413


class InvariantViolationError(SimplificationError):
    """An internal consistency check failed: signals a bug, never bad input."""
    http_status = 500
    exit_code = 2


class PairingMismatchError(InvariantViolationError):
    pass


class OracleDiffError(InvariantViolationError):
    pass


class JourneyBlockedError(InvariantViolationError):
    pass


class QuadrantClearingError(InvariantViolationError):
    pass
