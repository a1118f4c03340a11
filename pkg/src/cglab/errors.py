"""Exception hierarchy shared by every cglab module."""


class CglabError(Exception):
    """Base class for all library errors."""


class FieldMismatchError(CglabError, ValueError):
    """Operands live in different fields."""


class ParseError(CglabError, ValueError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)


class InexactDivisionError(CglabError, ArithmeticError):
    """Laurent division left a nonzero remainder and exactness was required."""


class DomainError(CglabError, ValueError):
    """A point lies outside the domain of a function."""


class ConvexityError(CglabError):
    """A discrete convexity check failed where the construction needs it."""


class ConstructionError(CglabError):
    """A squeezing construction's structural hypothesis was violated."""


class ResourceLimitError(CglabError):
    """An intermediate set exceeded the configured element cap.

    Signals that the instance is too large, not that the mathematics failed.
    """

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"intermediate set of size {size} exceeds cap {cap}")
