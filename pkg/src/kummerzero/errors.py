"""Exception hierarchy.

Domain errors describe bad inputs or numerically hopeless requests; the
``InternalCheckFailure`` family signals that one of the library's own
self-checks failed, which always indicates a bug or insufficient precision.
"""


class KummerError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameters(KummerError):
    pass


class PoleError(KummerError):
    pass


class DomainError(KummerError):
    pass


class BoundaryZeroError(KummerError):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class ConvergenceError(KummerError):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class DerivativeVanishes(ConvergenceError):
    pass


class EmptyZeroSet(KummerError):
    pass


class TooFewZeros(KummerError):
    pass


class RadiusTooCloseToZero(KummerError):
    pass


class IndexOutOfRange(KummerError):
    pass


class CertificateError(KummerError):
    pass


class InternalCheckFailure(KummerError):
    """A self-check failed. Never caused by user input alone."""


class NonIntegerWinding(InternalCheckFailure):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class BoundViolation(InternalCheckFailure):
    def __init__(self, message, m=None):
        super().__init__(message)
        self.m = m


class TheoremViolation(InternalCheckFailure):
    pass


class InequalityViolation(InternalCheckFailure):
    pass
