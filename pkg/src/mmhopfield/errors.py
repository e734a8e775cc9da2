"""Exception types shared across the package."""


class InstabilityError(RuntimeError):
    """The quadratic form is not positive definite: the dynamical matrix has
    eigenvalues with a non-negligible imaginary part."""


class NumericalError(RuntimeError):
    """Eigensolver non-convergence or a violated numerical sanity check."""


class ConvergenceError(RuntimeError):
    """No optimizer restart reached the convergence tolerance."""


class DataCoverageError(ValueError):
    """Input data insufficient to constrain the requested estimate."""


class ProfileFormatError(ValueError):
    """Malformed field-profile, mask, or peak-list file. The message names the
    offending file and line."""
