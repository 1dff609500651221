"""Exception hierarchy shared by the symbolic, parsing and numeric layers."""


class VarcondError(Exception):
    pass


class ParseError(VarcondError):
    """Problem text or an expression could not be read.

    ``line`` is the 1-based line in a problem file when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.message = message
        self.line = line

    def __str__(self):
        if self.line is None:
            return self.message
        return f"line {self.line}: {self.message}"


class ExpressionSyntaxError(ParseError):
    def __init__(self, message, offset, line=None):
        super().__init__(f"{message} (at offset {offset})", line)
        self.offset = offset


class UnknownIdentifier(ParseError):
    pass


class OrderExceeded(ParseError):
    pass


class MissingSection(ParseError):
    pass


class MissingKey(ParseError):
    pass


class BadBounds(ParseError, ValueError):
    pass


class NumericError(VarcondError):
    pass


class DomainError(NumericError, ArithmeticError):
    """Evaluation left the domain of an operation (x/0, log of x <= 0, ...)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class UnboundCoordinate(NumericError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidCoordinate(VarcondError, ValueError):
    pass


class TooManyNodes(NumericError, ValueError):
    pass


class NonFiniteEntry(NumericError, ValueError):
    pass
