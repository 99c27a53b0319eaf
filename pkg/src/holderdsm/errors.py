"""Exception hierarchy."""


class DSMError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(DSMError, ValueError):
    """Incompatible dimensions, weights or otherwise malformed inputs."""


class NonConvergenceError(DSMError, RuntimeError):
    """The regularized-equation solver ran out of iterations."""

    def __init__(self, message, best_residual=None, best_iterate=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_iterate = best_iterate


class InitConditionError(DSMError, ValueError):
    """The starting point already satisfies the stopping criterion.

    Such a ``u0`` is itself an approximate solution, so no flow is run.
    """

    def __init__(self, message, discrepancy=None, target=None):
        super().__init__(message)
        self.discrepancy = discrepancy
        self.target = target


class StoppingTimeout(DSMError, RuntimeError):
    """The horizon was reached before the discrepancy crossed its target."""

    def __init__(self, message, record=None, final_discrepancy=None):
        super().__init__(message)
        self.record = record
        self.final_discrepancy = final_discrepancy


class StiffnessError(DSMError, RuntimeError):
    """The adaptive step size underflowed."""

    def __init__(self, message, record=None, t=None):
        super().__init__(message)
        self.record = record
        self.t = t


class ConfigError(DSMError, ValueError):
    """Malformed study configuration; carries the offending line number."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
