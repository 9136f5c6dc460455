from typing import Optional


class LazyRamError(Exception):
    """Root of every error raised by the library."""


class ParseError(LazyRamError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ForwardReference(ParseError):
    pass


class DanglingLabel(ParseError):
    pass


class MissingTransition(ParseError):
    pass


class ArithmeticViolation(LazyRamError):
    pass


class NotExact(ArithmeticViolation):
    pass


class DivByZero(ArithmeticViolation):
    pass


class ArityMismatch(ArithmeticViolation):
    pass


class WidthViolation(ArithmeticViolation):
    pass


class BudgetError(LazyRamError):
    """Raised when an instance leaves the configured resource envelope."""


class BudgetExceeded(BudgetError):
    pass


class StepBudgetExhausted(BudgetError):
    pass


class IterationBudgetExhausted(BudgetError):
    pass


class GenerationFailed(LazyRamError):
    pass


class GateViolation(LazyRamError):
    def __init__(self, op, label=None):
        self.op = op
        self.label = label
        where = f" at label {label}" if label is not None else ""
        super().__init__(f"operation '{op}' is outside the gate{where}")


class UnsupportedOp(LazyRamError):
    pass


class UnsupportedProgram(LazyRamError):
    pass


class MalformedDescription(LazyRamError):
    pass


class InputTooWide(LazyRamError):
    pass


class NotAccepting(LazyRamError):
    pass


class SchemeConstraint(LazyRamError):
    pass


class WitnessRejected(LazyRamError):
    """Internal signal of a failed verifier check; verifiers turn it into a reject verdict."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)
