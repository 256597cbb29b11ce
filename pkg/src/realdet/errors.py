"""Exception hierarchy. Numerical failures map to CLI exit code 3."""


class RealdetError(Exception):
    pass


class NumericalError(RealdetError):
    pass


class PreconditionError(RealdetError, ValueError):
    pass


class StripExceededError(NumericalError):
    pass


class UnderResolvedError(NumericalError):
    pass


class NonComposableError(NumericalError):
    pass


class NewtonError(NumericalError):
    pass


class InjectivityError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class ResidualError(NumericalError):
    pass


class ConformalityError(NumericalError):
    pass


class OutsideDomainError(NumericalError):
    pass


class TruncationDisagreementError(NumericalError):
    pass


class GridMismatchError(PreconditionError):
    pass


class ChargeMismatchError(PreconditionError):
    pass


class SeamError(PreconditionError):
    pass


class AdmissibilityError(PreconditionError):
    pass


class FieldSpecError(PreconditionError):
    pass
