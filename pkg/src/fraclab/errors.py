"""Exception hierarchy shared by all fraclab modules."""

from __future__ import annotations


class FracLabError(Exception):
    """Base class for every error raised by this package."""


class ConfigInvalid(FracLabError):
    """An experiment configuration failed validation."""


class EvalAtSingularity(FracLabError):
    """A field was evaluated on its singular set."""


class UnsupportedOrder(FracLabError):
    """A derivative or operator order outside the supported range."""


class NotSmoothAtPoint(FracLabError):
    """Pointwise evaluation requested where the field is not C^2."""


class TailNotIntegrable(FracLabError):
    """The far-field tail fails the integrability needed by the operator."""


class QuadratureFailure(FracLabError):
    """A quadrature did not converge to the requested tolerance."""


class OscillatoryQuadratureFailure(QuadratureFailure):
    """An oscillatory (Fourier/Hankel) quadrature failed to settle."""


class PotentialDiverges(FracLabError):
    """A Riesz potential diverges for the requested source and order."""


class PointOnSet(FracLabError):
    """Distance-gradient style quantities requested on the set itself."""


class NotDifferentiable(FracLabError):
    """The distance function has no gradient at the requested point."""


class DegenerateShell(FracLabError):
    """A Monte Carlo shell estimate carries no statistical weight."""


class FitUnstable(FracLabError):
    """A log-log regression does not support a power-law reading."""


class EpsTooLarge(FracLabError):
    """A cutoff scale incompatible with the family's outer geometry."""


class ReachTooSmall(FracLabError):
    """Tube radius exceeds the reach of the underlying set."""


class SigmaTooLarge(FracLabError):
    """Order sigma incompatible with the capacity dimension condition."""


class ModelNotIntegrable(FracLabError):
    """A model singularity profile is not locally integrable."""
