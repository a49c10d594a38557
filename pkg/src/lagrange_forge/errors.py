"""Exception hierarchy shared by every module."""


class LagrangeForgeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LagrangeForgeError, ValueError):
    """Malformed expression text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class UnknownFunction(ParseError):
    pass


class IndexOutOfRange(ParseError):
    pass


class DomainError(LagrangeForgeError, ArithmeticError):
    """Numeric evaluation left the real domain (log of non-positive, pole, ...)."""


class UnboundSymbol(LagrangeForgeError, LookupError):
    pass


class DimensionMismatch(LagrangeForgeError, ValueError):
    pass


class SingularHessian(LagrangeForgeError):
    pass


class EmptySolution(LagrangeForgeError):
    """The ansatz family contains no nonzero solution."""


class IllConditioned(LagrangeForgeError):
    """Numerical rank decision is ambiguous at the requested tolerance."""

    def __init__(self, message, gap=None):
        self.gap = gap
        super().__init__(message)


class DegenerateVariation(LagrangeForgeError):
    pass


class UnsupportedClass(LagrangeForgeError):
    pass


class NoCompletion(LagrangeForgeError):
    pass


class StepLimitExceeded(LagrangeForgeError):
    pass


class ProblemFileError(LagrangeForgeError, ValueError):
    """Invalid problem file (schema or expression error)."""


class NotASymmetryWarning(UserWarning):
    pass
