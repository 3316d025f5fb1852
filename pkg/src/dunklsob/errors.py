"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` so the CLI and the
verification harness can report failures without parsing messages.
"""


class DunklError(Exception):
    code = "ERROR"


class ValidationError(DunklError, ValueError):
    code = "VALIDATION"


class NonClosedSystemError(ValidationError):
    code = "NON_CLOSED_SYSTEM"


class NegativeMultiplicityError(ValidationError):
    code = "NEGATIVE_MULTIPLICITY"


class ZeroRootError(ValidationError):
    code = "ZERO_ROOT"


class ClosureOverflowError(DunklError, RuntimeError):
    code = "CLOSURE_OVERFLOW"


class OnWallError(ValidationError):
    code = "ON_WALL"


class NoConvergenceError(DunklError, RuntimeError):
    code = "NO_CONVERGENCE"


class UnboundedDomainError(ValidationError):
    code = "UNBOUNDED_DOMAIN"


class UnsupportedShapeError(ValidationError):
    code = "UNSUPPORTED_SHAPE"


class UnsupportedRootSystemError(ValidationError):
    code = "UNSUPPORTED_ROOT_SYSTEM"


class ArgumentTooLargeError(ValidationError):
    code = "ARGUMENT_TOO_LARGE"


class NonpositiveTimeError(ValidationError):
    code = "NONPOSITIVE_TIME"


class ParameterRangeError(ValidationError):
    code = "PARAMETER_RANGE"


class DivergentIntegralError(ValidationError):
    code = "DIVERGENT_INTEGRAL"


class NegativeMassError(ValidationError):
    code = "NEGATIVE_MASS"


class UnboundedFieldError(ValidationError):
    code = "UNBOUNDED_FIELD"


class UnknownCheckError(ValidationError):
    code = "UNKNOWN_CHECK"
