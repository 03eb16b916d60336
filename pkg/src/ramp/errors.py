"""Error types shared across the toolkit.

Every failure mode carries a stable machine-readable code so callers (and the
CLI) can branch on it without string matching.
"""

from __future__ import annotations


class RampError(Exception):
    """Base class; `code` is a stable identifier, `message` is for humans."""

    code = "ERROR"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"


class ValidationFailure(RampError):
    """A goal, catalog, or config failed validation."""

    code = "VALIDATION"


class GoalFileError(RampError):
    """Raised by the goal XML parser."""

    code = "PARSE_ERROR"


class SchemaError(GoalFileError):
    code = "SCHEMA_ERROR"


class SemanticError(GoalFileError):
    code = "SEMANTIC_ERROR"


class CatalogError(RampError):
    code = "MISSING_FILE"


class DescriptionError(RampError):
    """Raised by the action-language parser."""

    code = "PARSE_ERROR"


class SortError(DescriptionError):
    code = "SORT_ERROR"


class UndeclaredSymbol(DescriptionError):
    code = "UNDECLARED_SYMBOL"


class GroundingError(RampError):
    code = "EMPTY_SORT"


class TransitionError(RampError):
    """Raised by the transition function."""

    code = "TRANSITION"


class NotApplicable(TransitionError):
    code = "NOT_APPLICABLE"


class AmbiguousClosure(TransitionError):
    code = "AMBIGUOUS_CLOSURE"


class InconsistentState(TransitionError):
    code = "INCONSISTENT"


class IllegalEvent(RampError):
    code = "ILLEGAL_EVENT"


class InvalidInit(RampError):
    code = "INVALID_INIT"


class NoPlan(RampError):
    code = "NO_PLAN"

    def __init__(self, message: str, horizon_searched: int):
        super().__init__(message)
        self.horizon_searched = horizon_searched


class RefinementFailed(RampError):
    code = "REFINEMENT_FAILED"


class StateSpaceTooLarge(RampError):
    code = "STATE_SPACE_TOO_LARGE"


class ConfigError(RampError):
    code = "CONFIG_ERROR"


class MalformedTrace(RampError):
    code = "MALFORMED_TRACE"


class GridError(RampError):
    code = "GRID_ERROR"


class ProtocolError(RampError):
    code = "PROTOCOL"


class IOErrorWrapper(RampError):
    code = "IO_ERROR"
