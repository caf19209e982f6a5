class FractalError(Exception):
    """Root of every error raised by fractal_core"""


class DivisionByZeroElement(FractalError, ZeroDivisionError):
    """Raised when dividing by the zero element 0^alpha"""


class GammaDomainError(FractalError, ValueError):
    """Raised when the Gamma function is requested for t <= 0"""


class ExpressionSyntaxError(FractalError, ValueError):
    """
    Raised by the DSL parser, carries the 1-based line and column of the
    offending token
    """

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class NonTotalPiecewise(ExpressionSyntaxError):
    pass


class EvaluationError(FractalError, ArithmeticError):
    """Raised on poles, invalid powers or points outside the domain"""


class CombineError(FractalError, TypeError):
    pass


class PreconditionError(FractalError, ValueError):
    pass


class ParameterError(FractalError, ValueError):
    pass


class CorpusError(FractalError, OSError):
    """Raised when a corpus file cannot be read"""
