"""Exception hierarchy shared by the library and the CLI.

The CLI maps exceptions to exit codes: usage errors exit 1, data errors
exit 2, numeric failures exit 3.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class AsrBiasError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_DATA


class DataError(AsrBiasError):
    """Malformed or inconsistent input data."""

    exit_code = EXIT_DATA


class ManifestError(DataError):
    pass


class AudioError(DataError):
    pass


class ArchiveError(DataError):
    pass


class ModelFormatError(DataError):
    pass


class TableFormatError(DataError):
    pass


class ScoringError(DataError):
    pass


class ConfigError(DataError):
    pass


class NumericError(AsrBiasError):
    """Numerical failure (singular system, degenerate model, ...)."""

    exit_code = EXIT_NUMERIC
