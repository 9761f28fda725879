"""Exception hierarchy.

Errors fall into three families that the command line maps onto exit codes:
``InputError`` (bad or incomplete input, exit 2), ``HypothesisViolation``
(the map does not satisfy the theorem's premise, exit 1) and
``NumericIndeterminacy`` (the data cannot be classified reliably, exit 3).
"""


class ProjectiveError(Exception):
    """Base class for every error raised by this package."""


class InputError(ProjectiveError, ValueError):
    pass


class HypothesisViolation(ProjectiveError):
    """The ray map violates a premise (collineation or quasi-unitarity).

    ``witness`` carries the offending inputs when one is available.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NumericIndeterminacy(ProjectiveError):
    pass


class ZeroVector(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DegenerateJoin(InputError):
    pass


class TooFewRays(InputError):
    pass


class WrongFrameSize(InputError):
    pass


class DimensionTooSmall(InputError):
    pass


class IllConditioned(InputError):
    pass


class FieldMismatch(InputError):
    """Complex data handed to an operation running over the real field."""


class SigmaMismatch(InputError):
    pass


class KindMismatch(InputError):
    pass


class ProbeNotTabulated(InputError):
    """A tabulated map was asked for rays it does not store.

    Attributes:
        missing: the probe rays that could not be answered, in probe order.
    """

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class NotACollineation(HypothesisViolation):
    pass


class NotQuasiUnitary(HypothesisViolation):
    pass


class ImageNotOrthonormal(HypothesisViolation):
    pass


class CoefficientMagnitudeViolation(HypothesisViolation):
    pass


class CompatibilityFailure(HypothesisViolation):
    pass


class AutomorphismUndetermined(NumericIndeterminacy):
    pass
