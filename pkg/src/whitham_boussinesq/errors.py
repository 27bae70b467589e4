"""Exception hierarchy shared by the library and the command line."""


class WhithamError(Exception):
    """Base class for all errors raised by this package."""


class GridError(WhithamError, ValueError):
    pass


class FieldError(WhithamError, ValueError):
    pass


class NonHermitianError(WhithamError, ValueError):
    """A multiplier produced a field with a significant imaginary part."""


class StabilityError(WhithamError, ValueError):
    """Requested time step exceeds the explicit stability bound."""


class BlowUpError(WhithamError):
    """Raised when a trajectory leaves the admissible region.

    ``last_state`` is the last finite state reached and ``time`` the time at
    which the failure was detected.
    """

    def __init__(self, message, time=None, last_state=None):
        super().__init__(message)
        self.time = time
        self.last_state = last_state


class DegenerateIterateError(WhithamError):
    pass


class ConvergenceError(WhithamError):
    pass


class ReferenceDataError(WhithamError, ValueError):
    """Invalid reference wave; ``kind`` names the violated invariant
    (``schema``, ``monotone``, ``decay`` or ``support``)."""

    def __init__(self, message, kind="schema"):
        super().__init__(message)
        self.kind = kind


class PeakTrackingError(WhithamError):
    pass
