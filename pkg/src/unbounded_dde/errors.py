"""Exception hierarchy shared by all solver layers."""


class DDEError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DDEError, ValueError):
    """Argument outside the domain of a function or operator."""


class DomainExitError(DomainError):
    """A segment left the domain of the right-hand side during a solve."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class InvariantError(DDEError, ValueError):
    """A data type was constructed in violation of its invariants."""


class AlignmentError(DDEError, ValueError):
    """Quadrature samples do not line up with the requested panels."""


class StepSelectionError(DDEError):
    """No admissible step length above the minimum could be found.

    Usually a sign of blow-up or stiffness near the current state.
    """

    def __init__(self, message, last_step=None):
        super().__init__(message)
        self.last_step = last_step


class NonconvergenceError(DDEError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HorizonError(DDEError, ValueError):
    """A run does not reach the time that was asked for."""


class RunFailedError(DDEError):
    """A semiflow or process run terminated before its horizon."""

    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run
