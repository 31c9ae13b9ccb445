import logging

from utils.errors import CapacityError, ConvergenceError, DomainError, InternalError, PinLabError, UsageError

# Enabling logs
log = logging.getLogger(__name__)

# Exit code for anything that is not a pinlab error.
UNEXPECTED_EXIT = 1


def handle_error(error: Exception, command: str = None) -> int:
    """Log an exception raised inside a command and map it to an exit code.

    Handled errors:
        UsageError
        CapacityError
        DomainError
        ConvergenceError
        InternalError

    Anything else is logged with its traceback and exits with 1.

    Args:
        error (Exception): The error that was raised.
        command (str, optional): Name of the command that raised it.

    Returns:
        int: Process exit code.
    """
    command = command or "pinlab"

    # Going through diffrent types of errors to handle them differently.
    if isinstance(error, UsageError):
        log.error(f"{command}: invalid arguments: {error}")
        return error.exit_code

    if isinstance(error, CapacityError):
        log.error(f"{command}: request too large: {error}")
        return error.exit_code

    if isinstance(error, DomainError):
        log.error(f"{command}: invalid input: {error}")
        return error.exit_code

    if isinstance(error, ConvergenceError):
        log.warning(f"{command}: did not converge: {error}")
        return error.exit_code

    if isinstance(error, InternalError):
        log.critical(f"{command}: internal numerical error: {error}", exc_info=error)
        return error.exit_code

    if isinstance(error, PinLabError):
        log.error(f"{command}: {error}")
        return error.exit_code

    log.exception(f"{command}: unexpected {type(error).__name__}", exc_info=error)
    return UNEXPECTED_EXIT
