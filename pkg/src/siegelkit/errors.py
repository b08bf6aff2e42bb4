"""Exception hierarchy shared by all siegelkit modules."""


class SiegelkitError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class SingularMatrix(SiegelkitError):
    pass


class NotPositiveDefinite(SiegelkitError):
    pass


class NearSingular(SiegelkitError):
    pass


class ShapeError(SiegelkitError):
    pass


class DomainError(SiegelkitError):
    pass


class PrecisionExhausted(SiegelkitError):
    """Raised when a certificate cannot be produced at the working precision.

    Retrying with more bits usually helps.
    """


class NotSameSegment(SiegelkitError):
    pass


class RetriesExhausted(SiegelkitError):
    pass


class InconsistentOmega(SiegelkitError):
    pass
