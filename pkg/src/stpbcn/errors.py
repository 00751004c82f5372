"""Exception types shared across the package."""


class BCNError(Exception):
    """Base class for library errors."""


class DimensionMismatch(BCNError, ValueError):
    pass


class NotLogicalResult(BCNError):
    """A product that should be logical was not; indicates an indexing bug."""


class IndexOutOfRange(BCNError, IndexError):
    pass


class SchemaError(BCNError, ValueError):
    pass


class ConflictingDefinition(SchemaError):
    pass


class ExpressionSyntaxError(BCNError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownIdentifier(BCNError, ValueError):
    pass


class ArityMismatch(BCNError, ValueError):
    pass


class SearchSpaceTooLarge(BCNError):
    def __init__(self, candidates: int, budget: int):
        super().__init__(f"{candidates} candidates exceed the budget of {budget}")
        self.candidates = candidates
        self.budget = budget


class Unclassifiable(BCNError):
    """Some substates fall in no decomposition layer; the disturbance cannot be decoupled."""

    def __init__(self, remainder):
        super().__init__(f"substates {sorted(remainder)} are not classified into any layer")
        self.remainder = frozenset(remainder)


class InconsistentTrace(BCNError, ValueError):
    pass
