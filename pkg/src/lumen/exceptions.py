class SingularityError(ValueError):
    """Field requested at the dipole location."""


class IntegratorError(RuntimeError):
    """ODE integration failed (step-size underflow or similar)."""


class FitError(RuntimeError):
    """Decay fit impossible (no decay, too short a trajectory)."""


class AccuracyError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""
