"""Exception hierarchy shared by every module."""


class ConvarbError(Exception):
    """Base class."""


class DomainError(ConvarbError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class PreconditionError(ConvarbError):
    """An analysis was requested on a path that does not satisfy its hypothesis."""


class InvariantViolation(ConvarbError):
    """A model emitted data breaking one of its structural invariants."""
