"""Exception hierarchy shared by every hegrad module."""


class HegradError(Exception):
    """Base class for all library errors."""


class ValidationError(HegradError, ValueError):
    """Malformed input: bad files, bad shapes, bad parameters."""


class PrecisionExceeded(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class EvenModulus(ValidationError):
    pass


class BoundViolated(HegradError):
    pass


class PlaintextTooLarge(ValidationError):
    pass


class MissingVariable(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnownedCoefficient(ValidationError):
    pass


class InvalidRandomizer(ValidationError):
    pass


class PlaintextOutOfRange(ValidationError):
    pass


class KeyMismatch(ValidationError):
    pass


class PrimeGenerationFailure(HegradError):
    pass


class InvalidDelta(ValidationError):
    pass


class MalformedObservations(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class ConfigInvalid(ValidationError):
    pass


class SizeTooSmall(ValidationError):
    pass


class AssumptionGateError(HegradError):
    """A problem does not meet the preconditions of the requested scheme."""


class NotAffine(AssumptionGateError):
    pass


class KeyBoundViolated(AssumptionGateError):
    """The key is too small for the plaintexts of a run.

    ``step`` is the iteration at which the check failed, or ``None`` when
    the failure was found by the pre-run check.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class AuditViolation(HegradError):
    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending
