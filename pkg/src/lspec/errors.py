"""Exception hierarchy shared by all lspec modules."""


class LspecError(Exception):
    """Base class for all lspec computation errors."""


class SignatureError(LspecError):
    """Metric is not Lorentzian of signature (1, n-1) at the sampled point."""


class DomainError(LspecError):
    """Evaluation point outside the admissible domain."""


class EscapeError(LspecError):
    """A geodesic left the coordinate patch before parameter 1."""


class StepError(LspecError):
    """An ODE integrator failed to meet its tolerance."""


class RadiusError(LspecError):
    """Requested normal-chart radius exceeds the verified injectivity margin."""


class FitError(LspecError):
    """A least-squares jet fit exceeded its residual tolerance."""


class GridError(LspecError):
    """A sampling grid is too coarse for the requested finite differences."""


class SingularityWarning(UserWarning):
    """Radial quadrature near s=0 failed to certify its tolerance."""


class BranchError(LspecError):
    """Argument lies on the branch cut of the principal logarithm."""


class PoleError(LspecError):
    """Evaluation requested at (or too close to) a pole without residue mode."""


class ConvergenceError(LspecError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class TailError(LspecError):
    """A truncation-tail certificate could not be established."""


class ToleranceError(LspecError):
    """A quadrature error estimate exceeds the requested tolerance."""


class DimensionError(LspecError):
    """Operation not defined in this spacetime dimension."""


class ConditioningError(LspecError):
    """A least-squares system is too ill-conditioned to trust."""


class MemoryError_(LspecError):
    """Spectral level count exceeds the configured cap."""


class CharacteristicError(LspecError):
    """Phase-space point is not on the characteristic set."""


class ConfigError(LspecError):
    """Malformed or inconsistent run configuration."""
