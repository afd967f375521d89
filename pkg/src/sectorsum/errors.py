"""Exception types shared across the toolkit."""


class SectorsumError(Exception):
    """Base class for all toolkit errors."""


class IncompatibleSpec(SectorsumError):
    """Norm specification does not fit the vector it is applied to."""


class SingularResolvent(SectorsumError):
    """Resolvent solve requested at (or numerically too close to) the spectrum."""


class SingularBase(SectorsumError):
    """Fractional or imaginary power of an operator with 0 in its spectrum."""


class SingularSum(SectorsumError):
    """Operator sum A + B is singular and cannot be inverted."""


class ContourTooTight(SectorsumError):
    """Contour opening angle does not separate the spectra it must enclose."""


class NotConverged(SectorsumError):
    """Quadrature defect stayed above tolerance after refinement."""


class WeightOutOfRange(SectorsumError):
    """Power weight exponent leaves the admissible decay window of the symbol."""


class StripViolation(SectorsumError):
    """Transform variable left the strip of absolute convergence."""


class PoleAt(SectorsumError):
    """Evaluation requested at a pole."""


class AngleViolation(SectorsumError):
    """Rotation angle outside the admissible range for the kernel."""


class ConfigError(SectorsumError):
    """Malformed or contradictory run configuration."""


class NumericalFailure(SectorsumError):
    """A suite produced rows whose measured defects exceed tolerance."""
