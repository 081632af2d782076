"""Exception types shared across the package."""


class CorutvError(Exception):
    """Base class for numerical failures raised by this package."""


class ConvergenceError(CorutvError):
    """An iterative kernel or solver hit its iteration cap.

    Carries enough state to diagnose the failure: the residual at the
    point of giving up and, for solvers, the residual history.
    """

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else None
