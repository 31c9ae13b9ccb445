"""Exceptions raised by pinlab.

Every error carries an exit code so the command line handler can map it
without knowing about the module that raised it.
"""


class PinLabError(Exception):
    """Base class for all pinlab errors."""

    exit_code = 1


class DomainError(PinLabError, ValueError):
    """An input violates the precondition of an operation."""

    exit_code = 3


class NoSignChangeError(DomainError):
    """A bracketing root search found no sign change on its interval."""


class CapacityError(PinLabError):
    """A request exceeds a hard size guard, such as exact enumeration."""

    exit_code = 4


class ConvergenceError(PinLabError):
    """A Markov chain or iterative method did not reach its tolerance."""

    exit_code = 5


class InternalError(PinLabError):
    """A numerical state that valid inputs cannot produce."""

    exit_code = 70


class UsageError(PinLabError):
    """Invalid combination of command line flags."""

    exit_code = 2
