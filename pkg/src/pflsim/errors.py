"""Exception types shared across the toolkit."""


class PflsimError(Exception):
    """Base class for all pflsim errors."""


class RankDeficient(PflsimError):
    """Jacobian (or its Gram matrix) is too ill-conditioned to invert."""


class NonFiniteDerivative(PflsimError):
    """State derivative returned NaN or infinity during integration."""


class UnknownRegion(PflsimError):
    """Requested body region is not one of the 12 canonical rows."""


class NonPositiveMass(PflsimError):
    """Mass arguments must be strictly positive."""


class SingularInertia(PflsimError):
    """Projected task-space mobility vanished along the requested direction."""


class DegenerateDirection(PflsimError):
    """Desired-inertia redistribution cannot keep all diagonal entries positive."""


class NumericalDivergence(PflsimError):
    """Simulated state norm exceeded the divergence threshold."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EmptyLog(PflsimError):
    """Metric requested on a log with no samples."""


class DimensionMismatch(PflsimError):
    """Runs with different task dimensions cannot share a comparison table."""


class ScenarioError(PflsimError):
    """Scenario file is malformed or references unknown entities."""
