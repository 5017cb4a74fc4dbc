"""Exception hierarchy shared by all modules."""


class MultibinError(Exception):
    """Base class for every error raised by this package."""


class InputError(MultibinError, ValueError):
    """Bad user-supplied data (maps to CLI exit code 1)."""


class NumericError(MultibinError, ArithmeticError):
    """Numerical failure (maps to CLI exit code 2)."""


class NegativeProbability(InputError):
    pass


class NotNormalized(InputError):
    pass


class EmptySupport(InputError):
    pass


class OutOfRange(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class RegularityViolated(InputError):
    """The first or last ``d`` probabilities of a forecast are nonzero."""


class SupportMismatch(InputError):
    pass


class UnknownTarget(InputError):
    pass


class MalformedRow(InputError):
    pass


class BinGridMismatch(InputError):
    pass


class MissingForecast(InputError):
    pass


class MissingTruth(InputError):
    pass


class DuplicateForecast(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class DidNotConverge(NumericError):
    pass
