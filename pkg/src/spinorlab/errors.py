"""Exception hierarchy.

Two families: ``ValidationError`` for bad input (CLI exit code 1) and
``InvariantViolation`` for conditions the theory rules out, which can only
mean an implementation fault (CLI exit code 2).
"""


class SpinorLabError(Exception):
    pass


class ValidationError(SpinorLabError, ValueError):
    pass


class InvariantViolation(SpinorLabError, RuntimeError):
    pass


# -- input / precondition errors ------------------------------------------

class ZeroInput(ValidationError):
    pass


class NotAnExtension(ValidationError):
    pass


class UnsupportedField(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IsotropicVector(ValidationError):
    pass


class ImproperIsometry(ValidationError):
    pass


class OddDimension(ValidationError):
    pass


class WrongParity(ValidationError):
    pass


class AlgebraMismatch(ValidationError):
    pass


class NotInCliffordGroup(ValidationError):
    pass


class NotInU(ValidationError):
    pass


class SplitDiscriminant(ValidationError):
    pass


class SplitDiscriminantOverL(SplitDiscriminant):
    pass


class MalformedTower(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


# -- invariant violations -------------------------------------------------

class LiftFailure(InvariantViolation):
    pass


class NotScalar(InvariantViolation):
    pass


class InconsistentLift(InvariantViolation):
    pass


class MultiplierNotInBase(InvariantViolation):
    pass


class NotInImageOfI(InvariantViolation):
    pass


class Hilbert90Failure(InvariantViolation):
    pass


class NoAnisotropicVector(InvariantViolation):
    pass
