"""Exception types raised by the library."""


class MeshError(ValueError):
    """Invalid mesh description (non-positive steps, wrong step sum, ...)."""


class SingularOperatorError(ArithmeticError):
    """Zero or near-zero pivot met while eliminating a tridiagonal system."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ConvergenceError(ArithmeticError):
    """An iterative method did not converge within its iteration budget."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ReferenceAccuracyError(RuntimeError):
    """The sine-series reference could not reach the requested accuracy."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved
