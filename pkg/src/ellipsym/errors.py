"""Exception types shared across the package."""


class EllipsymError(Exception):
    """Base class for all errors raised by this package."""


class NotSPD(EllipsymError):
    """A matrix required to be symmetric positive definite is not."""


class Singular(EllipsymError):
    """Sample has no usable affine structure (rank deficiency, mass ties)."""


class NoConvergence(EllipsymError):
    """An iterative fit failed to converge within its iteration budget."""


class DegenerateDirection(EllipsymError):
    """A projection direction has zero MAD (more than half the points tie)."""


class QuadratureFailure(EllipsymError):
    """Adaptive quadrature could not reach the requested tolerance."""


class InvalidConfig(EllipsymError):
    """A configuration value is out of its allowed range."""


class UnknownAlternative(EllipsymError):
    """Alternative identifier not defined for the requested dimension."""


class ZeroSpread(EllipsymError):
    """All input values are identical; no density can be estimated."""


class ParseError(EllipsymError):
    """Input file could not be parsed."""


class TooFewRows(EllipsymError):
    """Sample has too few rows for the requested operation."""


class VersionError(EllipsymError):
    """Serialized artifact header does not match what the reader expects."""


class DegenerateDenominator(EllipsymError):
    """Size-corrected relative power is undefined (zero power gain in B)."""
