from typing import Any, Dict, Optional


class TwistframeException(Exception):
    """Base class for all twistframe exceptions"""

    _msg_fmt = "An unknown exception occurred."

    def __init__(self, message: Optional[str] = None, **kwargs: Any):
        if not message:
            message = self._msg_fmt % kwargs

        super().__init__(message)


class GridError(TwistframeException):
    _msg_fmt = "Incompatible grid: %(reason)s"


class LambdaError(TwistframeException):
    _msg_fmt = "The Heisenberg parameter lambda must be nonzero (got %(lam)s)."


class DimensionError(TwistframeException):
    _msg_fmt = "Expected %(expected)s factors for this grid, got %(got)s."


class CapExceededError(TwistframeException):
    _msg_fmt = "Window of %(size)s lattice indices exceeds the configured cap of %(cap)s."


class UnknownExampleError(TwistframeException):
    _msg_fmt = "Unknown example id %(example_id)s (expected 1..6)."


class ReportError(TwistframeException):
    """Report validation or output failure. `path` names the offending file, if any."""

    _msg_fmt = "Could not write report: %(reason)s"

    def __init__(self, message: Optional[str] = None, path: Optional[str] = None, **kwargs: Any):
        self.path = path
        super().__init__(message, **kwargs)


class RefusalError(TwistframeException):
    """A mathematically meaningful refusal.

    Raised when the requested object does not exist (e.g. 1/w is not
    integrable), or when a numerical prerequisite for a computation route
    could not be verified. The diagnostic is emitted by the command line
    front end as a JSON report.
    """

    _msg_fmt = "Refused: %(reason)s"

    def __init__(self, message: Optional[str] = None, diagnostic: Optional[Dict[str, Any]] = None, **kwargs: Any):
        self.diagnostic: Dict[str, Any] = diagnostic or {}
        super().__init__(message, **kwargs)


class InputError(TwistframeException):
    _msg_fmt = "Invalid input: %(reason)s"
