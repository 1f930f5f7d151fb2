"""
Error Types
Exception hierarchy shared by every package, plus CLI exit codes
"""


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class OzoneTailError(Exception):
    """Base class for all errors raised by this project"""
    exit_code = 1


class InputError(OzoneTailError, ValueError):
    """Bad argument: dimension mismatch, out-of-range level, invalid config"""
    exit_code = EXIT_USAGE


class DataError(OzoneTailError, ValueError):
    """Problem with the content of an input file"""
    exit_code = EXIT_DATA


class ParseError(DataError):
    def __init__(self, message, line_number=None, path=None):
        """
        Args:
            message: What went wrong
            line_number: 1-based line in the file (header is line 1)
            path: File being parsed
        """
        self.line_number = line_number
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line_number is not None:
            where += f":{line_number}"
        super().__init__(f"{where}: {message}" if where else message)


class DuplicateKeyError(DataError):
    """Two rows share a key that must be unique"""


class LinkError(DataError):
    """A record points at a day or cell the sensitivity field does not have"""


class NumericalError(OzoneTailError, RuntimeError):
    """Cholesky failure, non-finite starting likelihood, ..."""
    exit_code = EXIT_NUMERICAL


def exit_code_for(error):
    """
    Map an exception to the CLI exit status

    Args:
        error: Exception instance

    Returns:
        int: process exit code
    """
    if isinstance(error, OzoneTailError):
        return error.exit_code
    if isinstance(error, FileNotFoundError):
        return EXIT_USAGE
    return 1
