"""Exception types raised by the toolkit.

Every error that signals a violated precondition or a failed geometric
certificate derives from :class:`GeometryError`, so callers can catch the
whole family with one handler while tests can pin the exact subtype.
"""


class GeometryError(Exception):
    """Base class for all toolkit errors."""


class BoundaryError(GeometryError):
    """A point (or its finite-difference stencil) leaves the chart box."""


class DomainEscapeError(GeometryError):
    """A flow trajectory or iteration left the chart box."""

    def __init__(self, message: str, exit_time: float | None = None):
        super().__init__(message)
        self.exit_time = exit_time


class DegenerateInputError(GeometryError):
    """Zero vector, zero-length segment, or similarly degenerate input."""


class ConvexityError(GeometryError):
    """Strict convexity of the norm is violated (e.g. |tau|_g >= 1)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class InvalidBodyError(GeometryError):
    """Gauge samples do not describe a valid star body around the origin."""


class DegenerateBettermentError(GeometryError):
    """Recentering the dual body pushed the origin out of the unit body."""


class IndefiniteMetricError(GeometryError):
    """A metric component matrix failed the positive-definiteness check."""


class DegeneratePlaneError(GeometryError):
    """The two vectors of a tangent plane are (numerically) collinear."""


class UnderdeterminedSystemError(GeometryError):
    """Too few sample points to determine the residual system rank."""


class InvalidMapError(GeometryError):
    """A point map has a (numerically) singular Jacobian."""


class InconsistencyError(GeometryError):
    """Cross-validation between infinitesimal and finite symmetry failed."""


class ConstructionError(GeometryError):
    """A gallery entry failed one of its construction certificates."""


class ExpressionError(GeometryError):
    """Invalid expression in a metric configuration."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position
