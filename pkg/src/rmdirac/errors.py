"""Exception hierarchy shared across the solver."""


class SolverError(Exception):
    """Base class for all rmdirac errors."""


class DomainError(SolverError):
    """Argument outside the mathematical domain of an operation."""


class ParameterError(SolverError):
    """Invalid parameter combination (e.g. hypergeometric c at a pole)."""


class ConvergenceError(SolverError):
    """Series or iteration failed to converge within its budget."""

    def __init__(self, msg, terms_used=None):
        super().__init__(msg)
        self.terms_used = terms_used


class NumericalError(SolverError):
    """Numerical guard tripped (conditioning, imaginary leak, overflow)."""


class BracketingError(SolverError):
    """Root bracketing lost or inconsistent during refinement."""


class ConfigError(SolverError):
    """Configuration file could not be parsed or validated."""
