"""Exception hierarchy shared by the pipeline stages."""


class TreeckError(Exception):
    """Base class for all errors raised by treeck."""


class GroupError(TreeckError, ValueError):
    """A multiplication table or embedding fails a group axiom.

    ``witness`` holds the offending element(s) so callers can report them.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HypothesisError(TreeckError):
    """The input violates a hypothesis the construction depends on."""

    def __init__(self, message, reasons=(), witness=None):
        super().__init__(message)
        self.reasons = tuple(reasons)
        self.witness = witness


class ConsistencyError(TreeckError):
    """Two independent computations of the same quantity disagree."""


class BoundError(TreeckError, ValueError):
    """A configured size bound (ball radius, matrix size, group order) was exceeded."""
