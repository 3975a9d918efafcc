"""Exception hierarchy shared by every module."""


class MMQPError(Exception):
    """Base class for all solver errors."""


class InputError(MMQPError):
    """Malformed or inconsistent input data."""


class ParseError(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class SingularMatrix(MMQPError):
    pass


class GSingular(InputError, SingularMatrix):
    pass


class NotNegativeDefinite(MMQPError):
    pass


class G22NotNegativeDefinite(InputError, NotNegativeDefinite):
    pass


class BorderedSingular(SingularMatrix):
    """The bordered matrix [[G22, B_a^T], [B_a, 0]] cannot be inverted."""


class NonnegativeCurvature(MMQPError):
    """Attempted to add a constraint whose curvature n^T H n is not negative."""


class EmptyActiveSet(MMQPError):
    pass


class IterationLimitExceeded(MMQPError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class GenerationFailed(MMQPError):
    pass


class NonPositivePrice(InputError):
    pass


class RaggedRows(InputError):
    pass
