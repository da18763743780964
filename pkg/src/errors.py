"""Exception types raised across the package."""

from typing import Any, Optional


class ScopeError(Exception):
    """Base class for every error raised by this package."""


class EmptySeriesError(ScopeError, ValueError):
    """Raised when an operation needs at least one latency sample."""

    def __init__(self, message: str = "empty series"):
        super().__init__(message)


class SeriesTooShortError(ScopeError, ValueError):
    """Raised when a series is too short for block-length selection."""

    def __init__(self, message: str = "series too short for block selection"):
        super().__init__(message)


class SessionTerminatedError(ScopeError, RuntimeError):
    """Raised when a finished session is stepped again."""

    def __init__(self, message: str = "session terminated"):
        super().__init__(message)


class ConfigurationError(ScopeError, ValueError):
    """Invalid configuration; `field` names the offending parameter."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SampleFormatError(ScopeError, ValueError):
    """A malformed or invalid record in a sample file."""

    def __init__(self, message: str, line_number: Optional[int] = None, content: str = ""):
        self.line_number = line_number
        self.content = content
        if line_number is not None:
            message = f"line {line_number}: {message} ({content!r})"
        super().__init__(message)


class InvocationError(ScopeError, RuntimeError):
    """An external command could not be run to completion."""

    def __init__(
        self,
        message: str,
        returncode: Optional[int] = None,
        stderr: str = "",
        completed: int = 0,
    ):
        self.returncode = returncode
        self.stderr = stderr
        self.completed = completed
        super().__init__(message)


class SourceError(ScopeError, RuntimeError):
    """A sample source failed mid-session.

    `partial` holds the SessionResult accumulated before the failure.
    """

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)
