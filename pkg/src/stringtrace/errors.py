"""Exception types shared across the package."""


class StringTraceError(Exception):
    """Base class for all package errors."""


class InvalidString(StringTraceError):
    """String data violates an admissibility condition."""


class OutOfDomain(StringTraceError):
    """A coordinate or interval leaves [0, R)."""


class BadParameter(StringTraceError):
    """Constructor parameter outside its allowed domain."""


class NonConvergent(StringTraceError):
    """Truncation or refinement did not stabilise within the allowed depth."""


class DegenerateNormalization(StringTraceError):
    """Backward ODE solution vanished at 0 even after refinement."""


class NotSymmetric(StringTraceError):
    """Operation requires b = 0."""


class QuadratureFailure(StringTraceError):
    """Adaptive quadrature could not reach the requested tolerance."""


class InvalidMeasure(StringTraceError):
    """A measure fails its integrability condition."""


class InsufficientSamples(StringTraceError):
    """Too few samples for the requested finite-difference order."""


class InsufficientLocalTime(StringTraceError):
    """Pooled local time below the configured floor."""


class IndexOne(StringTraceError):
    """Stable index 1 must be handled by the drift/Cauchy branch."""
