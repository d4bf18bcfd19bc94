"""Exception hierarchy.

Precondition failures derive from :class:`ValueError` so they behave like the
usual input-validation errors; numerical failures derive from
:class:`ArithmeticError`. The CLI maps the two families to distinct exit codes.
"""


class KacWardError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(KacWardError, ValueError):
    pass


class NumericalError(KacWardError, ArithmeticError):
    pass


class InvalidEdgeError(PreconditionError):
    pass


class InvalidGraphError(PreconditionError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidIsoradialError(PreconditionError):
    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class CouplingUndefinedError(PreconditionError):
    pass


class MissingWeightError(PreconditionError):
    pass


class EnumerationCapError(PreconditionError):
    """Raised when an exhaustive enumeration would exceed its cap.

    ``count`` holds the number of items produced (or required) when the cap
    was hit, ``partial`` whatever was produced up to that point.
    """

    def __init__(self, message, count=None, partial=None):
        super().__init__(message)
        self.count = count
        self.partial = partial


class NoCertificateError(PreconditionError):
    pass


class CertificateImpossibleError(PreconditionError):
    pass


class NotFermionConfigError(PreconditionError):
    pass


class OffLineError(PreconditionError):
    pass


class SingularOperatorError(NumericalError):
    pass


class BranchAmbiguityError(NumericalError):
    pass


class ZeroPartitionFunctionError(NumericalError):
    pass
