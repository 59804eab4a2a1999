"""Exception hierarchy shared by all camforge modules.

Every error raised on purpose derives from :class:`CamforgeError`, so the CLI
can map them to exit code 1 with the message text intact.
"""


class CamforgeError(Exception):
    """Base class for all deliberate camforge failures."""


class InvalidArgument(CamforgeError, ValueError):
    """A caller-supplied argument violates an operation's precondition."""


class RangeError(InvalidArgument):
    """A numeric value lies outside its configured physical range."""


class FormatError(CamforgeError):
    """A file's byte layout is wrong (bad magic, header, truncation)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DataError(CamforgeError):
    """Payload is well-formed but its values are unusable (NaN, inf)."""


class ParseError(CamforgeError):
    """Structured text (JSON sidecar) could not be interpreted."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DependencyError(CamforgeError):
    """A required proxy map or input is missing."""

    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = missing


class UnsupportedEffect(CamforgeError):
    """The requested operation is not defined for this effect kind."""


class UndefinedCorrelation(CamforgeError):
    """Correlation requested on a constant series."""
