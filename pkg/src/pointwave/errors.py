"""Exception types raised by the solvers."""


class PointwaveError(Exception):
    """Base class for all toolkit errors."""


class QuadratureError(PointwaveError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, interval=None):
        super().__init__(message if interval is None else f"{message} on {interval}")
        self.interval = interval


class ResonanceSingularityError(PointwaveError):
    """Undamped drive exactly at the natural frequency has no bounded steady state."""


class StepSizeError(PointwaveError):
    """Estimated integration error exceeds the requested tolerance."""


class OutOfRangeError(PointwaveError):
    """A lookup fell outside the stored time or space range."""


class CourantError(PointwaveError):
    """Grid time step violates the stability or exactness requirement."""


class BoundaryContaminationError(PointwaveError):
    """Domain edges are close enough to the coupling point to reach it before t_end."""


class IllConditionedStepError(PointwaveError):
    """Diagonal pivot of a product-integration step is numerically zero."""


class NewtonConvergenceError(PointwaveError):
    """Newton iteration on a step's unknowns failed to converge."""

    def __init__(self, message, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual
