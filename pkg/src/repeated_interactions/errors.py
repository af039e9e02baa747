"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (bad or inconsistent
input, CLI exit code 1) and :class:`NumericalError` (a computation that could
not be carried out, CLI exit code 2).
"""


class RepintError(Exception):
    """Base class for every error raised by this package."""


class InputError(RepintError, ValueError):
    """Invalid input: wrong shapes, violated invariants, malformed documents."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalError(RepintError, ArithmeticError):
    """A numerical procedure failed or its precondition cannot hold."""


class NonSquareError(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotHermitian(InputError):
    pass


class InvalidStep(InputError):
    pass


class InvalidTimestep(InvalidStep):
    pass


class SiteOutOfRange(InputError):
    pass


class MismatchedTimestep(InputError):
    pass


class NotAnIsometry(InputError):
    pass


class InvalidProjectionFamily(InputError):
    pass


class ParseError(InputError):
    pass


class SchemaError(InputError):
    pass


class ValidationError(InputError):
    pass


class InsufficientPoints(InputError):
    pass


class NonPositiveValue(InputError):
    pass


class EigenFailure(NumericalError):
    pass


class StateTooLarge(NumericalError):
    pass


class NormTooLarge(NumericalError):
    pass


class CompletionFailure(NumericalError):
    pass


class NotSelfAdjoint(NumericalError):
    def __init__(self, defect):
        self.defect = defect
        super().__init__(f"operator is not self-adjoint (defect {defect:.3e})")
