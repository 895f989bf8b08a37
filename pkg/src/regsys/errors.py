"""Exception types shared across the package."""


class RegsysError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(RegsysError):
    """Matrix or signal dimensions are inconsistent with the declared sizes."""


class SpectrumError(RegsysError):
    """A frequency-domain evaluation was requested at (or too close to) an
    eigenvalue of the generator."""


class AdmissibilityError(RegsysError):
    """A feedback loop cannot be closed: the relevant I - (loop gain) matrix
    is singular, or a required invertibility check failed."""


class ControllabilityError(RegsysError):
    """An operation requiring exact controllability/observability was applied
    to a system whose Gramian verdict is negative."""


class GridError(RegsysError):
    """A time value is not aligned with the grid, or grid parameters are
    invalid."""
