"""Exception types shared across the package.

Every error raised on a violated precondition carries enough context to
identify the offending input (point, field, or parameter) in its message.
"""


class SoulLabError(Exception):
    """Base class for all package-specific errors."""


class PointTooCloseToBoundary(SoulLabError):
    """A differential operator was asked to work too close to the chart edge."""


class SingularMetric(SoulLabError):
    """Metric components failed a positive-definiteness check."""


class DegeneratePlane(SoulLabError):
    """Two tangent vectors span a (numerically) degenerate 2-plane."""


class LeftChartDomain(SoulLabError):
    """A geodesic integration exited the chart box before its arc length ran out."""

    def __init__(self, message, point=None, arclength=None):
        super().__init__(message)
        self.point = point
        self.arclength = arclength


class NonFiniteFieldValue(SoulLabError):
    """A scalar field returned NaN or Inf at a quadrature node."""


class EmptySample(SoulLabError):
    """A scan was requested with zero sample points."""


class InvalidProfile(SoulLabError):
    """A rotation profile violates one of its defining conditions."""


class NonSmoothVertex(SoulLabError):
    """A plane profile does not close smoothly at its vertex."""


class OutOfDomain(SoulLabError):
    """A radius or coordinate lies outside the declared profile domain."""


class NonPositiveScale(SoulLabError):
    """A rescaling parameter that must be positive was not."""


class NegativeSquaredNorm(SoulLabError):
    """A squared norm argument was negative."""


class OutOfRange(SoulLabError):
    """A bundle parameter lies outside its admissible interval."""


class DegenerateFiber(SoulLabError):
    """A fiber radius or length degenerated to zero."""


class FrameDegeneracy(SoulLabError):
    """Orthonormalization of a coordinate frame is too ill-conditioned."""


class RescaleNotInvertible(SoulLabError):
    """A target soul profile cannot be realized by any pre-quotient metric."""


class NotMeanZero(SoulLabError):
    """A field that must integrate to zero over the sphere does not."""


class ZeroZ(SoulLabError):
    """A linear-eigenfunction fit produced a vanishing coefficient vector."""


class ConfigError(SoulLabError):
    """A run configuration failed validation; message names the field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
