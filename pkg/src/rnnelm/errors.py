"""Exception types raised by the library."""


class InvalidInputError(ValueError):
    """Input matrix or vector violates a precondition (NaN/Inf, empty, bad range)."""


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class NumericalFailureError(RuntimeError):
    """An iterative factorization failed to converge."""


class NoRealRootError(ArithmeticError):
    """The cluster quadratic has a negative discriminant."""


class RootRangeError(ValueError):
    """The cluster quadratic's root is not a probability in [0, 1]."""


class NoRootError(ArithmeticError):
    """Bisection found no sign change on [0, 1]."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration exceeded its iteration budget."""


class UnstableNetworkError(RuntimeError):
    """Steady-state firing probabilities saturate at or above 1."""


class DatasetFormatError(ValueError):
    """A dataset file failed to parse; the message names the byte offset."""


class ModelFormatError(ValueError):
    """A serialized model file is corrupt or has an unsupported version."""


class InvalidLabelError(ValueError):
    """A class label is outside [0, n_classes)."""
