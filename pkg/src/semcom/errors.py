"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class SemcomError(Exception):
    """Base class for every error raised on purpose by this package."""


class ParseError(SemcomError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class GroundingError(SemcomError, ValueError):
    pass


class GroundingSizeError(GroundingError):
    pass


class UnanswerableQuery(SemcomError, LookupError):
    def __init__(self, query):
        self.query = query
        super().__init__(f"query {query} does not match any clause head")


class EmptyKnowledgeBase(SemcomError, ValueError):
    pass


class EmptyInput(SemcomError, ValueError):
    pass


class Infeasible(SemcomError, ValueError):
    """No candidate satisfies the constraint (length budget, target content)."""


class PreconditionError(SemcomError, ValueError):
    pass


class ConfigError(SemcomError, ValueError):
    pass
