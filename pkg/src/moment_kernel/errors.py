"""Exception and warning types raised across the package."""


class MomentKernelError(Exception):
    """Base class for all errors raised by this package."""


class DivergentMoment(MomentKernelError, ArithmeticError):
    """A spectral moment integral does not converge or is undefined."""


class SingularPade(MomentKernelError, ArithmeticError):
    """The Pade linear system is rank deficient beyond recovery."""


class PoleInWindow(MomentKernelError, ArithmeticError):
    """The Pade denominator vanishes inside the requested time window."""


class InsufficientOrder(MomentKernelError, ValueError):
    """Too few moments were computed for the requested kernel order."""


class Unstable(MomentKernelError, ArithmeticError):
    """The integro-differential solver produced a diverging solution."""


class DimensionCap(MomentKernelError, MemoryError):
    """A dense oracle model would exceed the configured dimension cap."""


class TruncationLeak(MomentKernelError, ArithmeticError):
    """An oracle quantity is sensitive to the Fock-space cutoff."""


class ConfigError(MomentKernelError, ValueError):
    """A run configuration is malformed or inconsistent."""


class OverflowRisk(RuntimeWarning):
    """Moments grew large enough to threaten double-precision accuracy."""


class TruncationWarning(RuntimeWarning):
    """A half-line Fourier transform was taken of a signal that has not decayed."""


class PadeFallbackWarning(RuntimeWarning):
    """The Pade fit needed a fallback: least squares or a reduced order."""
