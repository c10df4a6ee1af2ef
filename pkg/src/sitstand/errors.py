"""Exception types shared by the pipeline stages."""


class SitStandError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class RejectedInputError(SitStandError, ValueError):
    exit_code = 8


class DegenerateInputError(RejectedInputError):
    """Input is well formed but carries no usable signal (e.g. zero variance)."""

    exit_code = 9


class InsufficientDataError(SitStandError):
    exit_code = 5


class AmbiguityError(SitStandError):
    exit_code = 10


class NumericalError(SitStandError, ArithmeticError):
    exit_code = 6


class ParseError(SitStandError):
    exit_code = 3

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ConfigError(SitStandError):
    exit_code = 4


class FileError(SitStandError, OSError):
    exit_code = 7
