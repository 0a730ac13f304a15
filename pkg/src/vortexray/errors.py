"""Exception hierarchy.

Every failure raised by the library derives from :class:`VortexRayError`.
Validation problems (bad inputs, violated preconditions) derive from
:class:`ValidationError`; numerical breakdowns derive from
:class:`NumericalError`. The CLI maps these to exit codes 2 and 3.
"""


class VortexRayError(Exception):
    """Base class for all library errors."""


class ValidationError(VortexRayError, ValueError):
    """Input or precondition rejected before any numerics ran."""


class NumericalError(VortexRayError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy answer."""


# profiles
class DomainError(ValidationError):
    """Radius outside the admissible range (r <= 0)."""


class SingularProfile(NumericalError):
    """W'(r) = 0 where q(r) = -Gamma'/W' was requested."""


class PoleError(NumericalError):
    """The Doppler-shifted frequency vanishes (real omega on a critical radius)."""


# ring locator
class NoRing(NumericalError):
    """No sign change of the ring condition in the admissible beta interval."""


class ConvergenceFailure(NumericalError):
    """Iteration budget exhausted."""


class AssumptionViolated(NumericalError):
    """A ring condition (b0 > 0, Lambda'' > 0, single level) fails.

    Attributes:
        which: name of the violated condition.
    """

    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"assumption violated: {which}")


# asymptotics
class OutOfRegime(ValidationError):
    """Diagnostic requested outside its stated scaling regime."""


class GridTooNarrow(ValidationError):
    """Inner grid truncates a non-negligible part of the Gaussian tail."""


# shooting
class StiffnessError(NumericalError):
    """Step count exceeded the configured ceiling."""


class NoConvergence(NumericalError):
    """Newton iteration on omega did not converge."""


class LeftSemicirclePlane(NumericalError):
    """Converged omega has Im(omega) <= 0, so it is not an unstable mode.

    Attributes:
        omega: the converged (stable or conjugate) root.
    """

    def __init__(self, omega, message=None):
        self.omega = omega
        super().__init__(message or f"converged to Im(omega) <= 0: {omega!r}")


class SeedEscape(NumericalError):
    """Newton left the ball around the asymptotic seed."""


# gluing
class IllConditioned(NumericalError):
    """Inner basis system too ill-conditioned to trust."""


class CoercivityLoss(NumericalError):
    """Outer finite-difference system singular or non-finite."""


class NoContraction(NumericalError):
    """Fixed-point iterates grew on consecutive steps."""


class WindingZero(NumericalError):
    """Argument principle found no root inside the contour."""


class WindingMultiple(NumericalError):
    """Argument principle found more than one root inside the contour."""


# criteria
class NegativeBound(NumericalError):
    """Growth-rate bound radicand negative everywhere: no unstable modes."""


# modal operator
class SingularBS(NumericalError):
    """Discrete curl system is rank deficient."""


class NoUnstable(NumericalError):
    """No eigenvalue with positive real part at this resolution."""


# reporting
class MissingPrerequisite(ValidationError):
    """Figure data requested without the inputs it needs."""
