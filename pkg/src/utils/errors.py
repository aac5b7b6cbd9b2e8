"""
Error hierarchy shared by all components.

Precondition violations are ValueError subclasses (CLI exit code 2),
numerical failures are RuntimeError subclasses (CLI exit code 3).
"""


class ConfigError(ValueError):
    """Raised when an experiment configuration cannot be parsed or validated."""


class NotBipartiteError(ValueError):
    """Raised when a coupling graph contains an odd cycle."""


class SaturationError(ValueError):
    """Raised when |<sigma_x>| is too close to 1 for the Fisher information to be informative."""


class ReferenceGuardError(ValueError):
    """Raised when the reference signal is too small to normalize against."""


class SingularMatrixError(ValueError):
    """Raised when a readout assignment matrix cannot be inverted."""


class ResonanceError(ValueError):
    """Raised when a qubit and coupler frequency coincide in the effective-coupling formula."""


class NumericalError(RuntimeError):
    """Base class for numerical failures."""


class ConvergenceError(NumericalError):
    """Raised when every start of a nonlinear fit failed."""


class NoPeakError(NumericalError):
    """Raised when an oscillation series has no dominant spectral peak."""


class SweepPointError(NumericalError):
    """Raised when a single grid point of a sweep fails; names the point."""

    def __init__(self, point_index: int, point: dict, cause: Exception):
        self.point_index = point_index
        self.point = point
        self.cause = cause
        super().__init__(f"Sweep point {point_index} {point} failed: {cause}")

    def __reduce__(self):
        return (self.__class__, (self.point_index, self.point, self.cause))
