"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`DiscError`.
Failures caused by the numerics (divergence, under-resolution, ...) derive
from :class:`NumericalFailure`; the CLI maps those to exit code 2.
"""


class DiscError(Exception):
    """Base class for all package errors."""


class NumericalFailure(DiscError):
    """A computation was well-posed but the numerics did not deliver."""


class InvalidGridError(DiscError):
    pass


class InvalidHermitianFormError(DiscError):
    pass


class NearBoundaryParameterError(DiscError):
    """|a| too close to 1 for a truncated Fourier representation."""


class IsotropicDirectionError(DiscError):
    """ᵗv̄Av vanishes for the requested direction."""


class AdmissibleRegionError(DiscError):
    """Point lies outside the centre image {Re γ > 1}."""


class InconsistentJetError(DiscError):
    """No star-normalized quadric disc has the requested boundary jet."""


class InvalidRotationError(DiscError):
    pass


class DegenerateFibrationError(NumericalFailure):
    def __init__(self, message, zeta=None):
        super().__init__(message)
        self.zeta = zeta


class UnderResolvedError(NumericalFailure):
    pass


class NotOnFibrationError(DiscError):
    pass


class DivergenceError(NumericalFailure):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ContinuationError(NumericalFailure):
    def __init__(self, message, last_tau=0.0, disc=None):
        super().__init__(message)
        self.last_tau = last_tau
        self.disc = disc


class NonHypersurfaceError(DiscError):
    pass


class NotNormalFormError(DiscError):
    pass


class SingularDifferentialError(NumericalFailure):
    pass


class NormalMisalignmentError(DiscError):
    pass


class DomainError(DiscError):
    pass
