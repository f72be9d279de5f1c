"""Exception types raised across the package."""


class HolographyError(ValueError):
    """Base class for domain errors in this package."""


class ModelError(HolographyError):
    """Invalid model specification or matrix input."""


class ResonanceError(HolographyError):
    """Spin and oscillator are resonant (Δ² = ω²); dispersive coupling diverges."""


class CutoffError(HolographyError):
    """Fock truncation too small for the requested levels."""


class SingularPointError(HolographyError):
    """Evaluation too close to a pole or zero of the partition function."""


class MatrixExponentialError(HolographyError):
    """Both the eigendecomposition and the scaling-and-squaring paths failed."""


class PeriodError(HolographyError):
    """A period was required but the spectrum is not uniformly spaced."""


class ConditioningError(HolographyError):
    """Target point too close to an integration contour or line."""


class ConvergenceError(HolographyError):
    """Quadrature did not reach the requested tolerance."""


class DampingConstantError(HolographyError):
    """A damping constant M∓ violates its spectral bound."""


class ConsistencyError(HolographyError):
    """A reconstructed quantity that must be real carries a large imaginary part."""
