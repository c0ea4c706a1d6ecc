"""
Error hierarchy shared by all quanvolve modules.

Each class carries the exit code the command line returns when it
reaches the top level uncaught.
"""


class QuanvolveError(Exception):
    """
    base class, raised only through one of the subclasses below
    """
    exit_code = 1


class ConfigError(QuanvolveError, ValueError):
    """
    is raised for invalid arguments, constraints and configuration
    """
    exit_code = 2


class DataError(QuanvolveError):
    """
    is raised for malformed or inconsistent data, offset is the byte position
    in binary inputs when known
    """
    exit_code = 3

    def __init__(self, message, offset=None):
        if offset is not None:
            message = '%s (at byte offset %d)' % (message, offset)
        super(DataError, self).__init__(message)
        self.offset = offset


class NumericError(QuanvolveError, ArithmeticError):
    """
    is raised when a computation produces non-finite or out of tolerance values
    """
    exit_code = 4


class PipelineError(QuanvolveError):
    """
    wraps the failure of one pipeline stage
    """

    def __init__(self, stage, cause):
        """

        :param stage: name of the failed stage
        :param cause: the original exception
        """
        super(PipelineError, self).__init__('stage `%s` failed: %s' % (stage, cause))
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, 'exit_code', QuanvolveError.exit_code)
