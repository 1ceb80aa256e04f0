"""Exception types raised by the toolkit.

Every error that carries a counterexample stores it in ``witness`` so that
callers (and reports) can show exactly what went wrong.
"""

from __future__ import annotations


class FinlocError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str = "", witness=None):
        super().__init__(message)
        self.witness = witness


class OrderCapExceeded(FinlocError):
    pass


class NotAGroup(FinlocError):
    pass


class NotNormal(FinlocError):
    pass


class NotAHomomorphism(FinlocError):
    pass


class NotNilpotent(FinlocError):
    pass


class TruncationTooShallow(FinlocError):
    pass


class NonNormalImage(FinlocError):
    pass


class PeifferViolated(FinlocError):
    pass


class TargetMismatch(FinlocError):
    pass


class SearchCapExceeded(FinlocError):
    pass


class ExpressionSearchExceeded(FinlocError):
    pass


class PredicateFailsOnBase(FinlocError):
    pass


class WellDefinednessFailure(FinlocError):
    pass


class Unsupported(FinlocError):
    pass


class ParseError(FinlocError):
    def __init__(self, message: str, position: int | str | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownSuite(FinlocError):
    pass
