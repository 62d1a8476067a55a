"""Exception types shared across the package."""


class SingularPointError(ValueError):
    """A potential was evaluated exactly on one of its singular points."""


class MultivaluedGaugeError(ValueError):
    """The proposed gauge generator is not single-valued on the plane."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge within the refinement depth cap.

    Carries the best available estimate and a bound on its error.
    """

    def __init__(self, message, best_estimate=None, error_bound=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class SingularityHitError(RuntimeError):
    """Trajectory integration ran into a field singularity.

    The partial trajectory accumulated before the hit is attached.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyTrajectoryError(ValueError):
    """The trajectory has no time extent to integrate over."""


class FieldMismatchError(ValueError):
    """An operation mixed a trajectory with a field it was not produced in."""


class EndpointMismatchError(ValueError):
    """Two interfering paths do not share start and end points."""


class UndefinedWavelengthError(ValueError):
    """Wave parameters were requested for a state with zero kinetic momentum."""


class GeometryError(ValueError):
    """Interferometer geometry violates a clearance or ordering constraint."""


class GridMismatchError(ValueError):
    """Two patterns or wavefunctions do not live on the same grid."""


class DegeneratePatternError(ValueError):
    """A fringe pattern is too flat for a shift to be defined."""


class BarrierOutsideGridError(ValueError):
    """A hard-wall barrier does not fit inside the lattice."""


class SolverFailureError(RuntimeError):
    """The iterative linear solve inside a time step did not converge.

    Carries the last relative residual.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SaturationTimeoutError(RuntimeError):
    """Screen signal failed to saturate within the step cap.

    The partial fringe pattern accumulated so far is attached.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
