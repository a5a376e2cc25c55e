"""Exception types shared across the package.

Numeric routines refuse to return silently wrong output: precondition
violations raise UsageError, leaving the declared domain raises
DomainError, and accuracy guards raise AccuracyError instead of
degrading quietly.
"""


class FermatwaveError(Exception):
    """Base class for all package errors."""


class DomainError(FermatwaveError):
    """Evaluation outside the declared domain box (no extrapolation)."""


class UsageError(FermatwaveError):
    """Contract violation in arguments (bad shapes, missing frequency, ...)."""


class AccuracyError(FermatwaveError):
    """Parameters cannot deliver the advertised accuracy; refusing to run."""


class DomainExitError(FermatwaveError):
    """A ray step left the domain.  Carries the boundary intersection."""

    def __init__(self, message, x_exit=None, s_exit=None, t_exit=None):
        super().__init__(message)
        self.x_exit = x_exit
        self.s_exit = s_exit
        self.t_exit = t_exit


class ConvergenceError(FermatwaveError):
    """Iteration failed to converge.  Carries the best iterate found."""

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class NoSignalError(FermatwaveError):
    """A time trace is all zeros (or below numerical floor)."""


class SolverError(FermatwaveError):
    """Linear system is singular or numerically unreliable."""
