"""Exception types shared across the solver pipeline."""


class QuasihelmError(Exception):
    """Base class for all package-specific failures."""


class InvalidArgument(QuasihelmError, ValueError):
    """An argument violates a documented precondition."""


class SingularGeometry(QuasihelmError):
    """Projection matrix is rank deficient where full rank is required."""


class InvalidCoefficient(QuasihelmError):
    """Coefficient is non-positive or failed to evaluate."""


class EmptyPencil(QuasihelmError):
    """All Fourier modes were deflated; no eigenproblem remains."""


class ConvergenceFailure(QuasihelmError):
    """Iterative eigensolver exhausted its iteration budget.

    Carries the best residuals seen so far in ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class EmptyEstimator(QuasihelmError):
    """Every physical sample was excluded from the quotient set."""


class NearSingularCoalesce(QuasihelmError):
    """Coalescing pivot |t2 - s1| fell below the configured floor."""


class ApproximantTooFine(QuasihelmError):
    """Requested rational approximant exceeds the supercell period cap."""


class ConfigError(QuasihelmError):
    """Experiment configuration failed schema validation."""
