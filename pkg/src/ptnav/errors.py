"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    pass


class DegenerateGeometry(ValueError):
    """Raised when a construction needs two distinct points and gets one."""


class InfeasibleConstraint(ValueError):
    def __init__(self, message, terms=None):
        super().__init__(message)
        self.terms = dict(terms or {})


class SingularityError(ArithmeticError):
    """Raised when the LOS rate is requested too close to its target."""


class InconsistentState(RuntimeError):
    pass


class NoRelativeMotion(ValueError):
    pass
