"""Exception types shared across the package."""


class TensorSketchError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TensorSketchError, ValueError):
    """Operand dimensions are incompatible or a size parameter is out of range."""


class NotOrthonormalError(TensorSketchError, ValueError):
    """A matrix expected to have orthonormal rows or columns does not."""


class ConvergenceError(TensorSketchError, ArithmeticError):
    """An iterative kernel exhausted its sweep budget."""


class FormatError(TensorSketchError):
    """A binary file does not follow its declared layout.

    ``offset`` is the byte position at which the problem was detected.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
