"""Exception types raised by the numerical routines."""


class HilferDiffusionError(Exception):
    """Base class for all package errors."""


class NumericalError(HilferDiffusionError):
    """A numerical method failed to deliver the requested accuracy."""


class NonConvergence(NumericalError):
    """A series did not meet its stopping rule within the term budget."""


class AsymptoticUnreliable(NumericalError):
    """The asymptotic expansion cannot reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NumericalBreakdown(NumericalError):
    """Contour inversion overflowed or failed its self-consistency check."""


class TailEstimateFailed(NumericalError):
    """The algebraic tail of a cosine transform could not be fitted."""


class PoleCollision(NumericalError):
    """Two contributing poles of an H-function coincide."""


class StripViolation(HilferDiffusionError, ValueError):
    """Mellin argument sits on a pole of the H-function kernel."""


class DomainError(HilferDiffusionError, ValueError):
    """Argument outside the domain of the operation."""


class ModelError(HilferDiffusionError, ValueError):
    """A model parameter set violates its invariants.

    ``violations`` holds one ``(field, message)`` pair per broken invariant.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(f"{f}: {m}" for f, m in self.violations)
        super().__init__(text)


class MomentDoesNotExist(HilferDiffusionError, ValueError):
    """Requested fractional moment diverges."""


class RequiresAlpha2(HilferDiffusionError, ValueError):
    """Operation needs the Gaussian space order alpha = 2."""


class AsymmetricUnsupported(HilferDiffusionError, ValueError):
    """Real-space evaluation is only available for zero skewness."""


class SingularEndpoint(HilferDiffusionError, ValueError):
    """Kernel exponent makes the convolution endpoint non-integrable."""


class ModeTruncationWarning(UserWarning):
    """A truncated eigenmode expansion may not have converged."""
