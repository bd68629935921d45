class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


class QuadratureError(RuntimeError):
    """Raised when the θ quadrature cannot reach the requested agreement."""


class ConsistencyError(ArithmeticError):
    """Raised when an internal numerical consistency check fails."""


class PropagationError(RuntimeError):
    """Norm drift exceeded the configured tolerance."""

    def __init__(self, dt: float, drift: float, tolerance: float):
        super().__init__(
            f"norm drift {drift:.3e} exceeds tolerance {tolerance:.1e} "
            f"(dt = {dt:.4e}); reduce the step size"
        )
        self.dt = dt
        self.drift = drift
        self.tolerance = tolerance
