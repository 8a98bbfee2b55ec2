from typing import Optional


class CpintError(Exception):
    """Base class for every domain error raised by the library."""

    def __init__(self, message: str, witness: Optional[float] = None):
        super().__init__(message)
        self.message = message
        self.witness = witness


class NotContinuous(CpintError):
    pass


class NoLimitAtInfinity(CpintError):
    pass


class BudgetExceeded(CpintError):
    pass


class MalformedPieces(CpintError):
    pass


class IntervalEmpty(CpintError):
    pass


class NonMonotone(CpintError):
    pass


class ResidualTooLarge(CpintError):
    pass


class DomainError(CpintError):
    pass


class UnknownFixture(CpintError):
    pass


class ExpressionError(CpintError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownFunction(ExpressionError):
    pass


class EvalError(ExpressionError):
    pass
