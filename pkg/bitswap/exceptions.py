from typing import Optional


class ContractViolation(ValueError):
    """
    Exception raised when the precondition of an operation does not hold (e.g. a value that is
    not a bit, a value wider than a register, a malformed schedule).
    """


class CapacityError(OverflowError):
    """
    Exception raised when a bounded max register is asked to store a value beyond its capacity.
    """


class RefusalError(RuntimeError):
    """
    Exception raised when a requested exploration or check exceeds its configured size bound.

    Arguments
    ---------
    message: str
        The description of the refused request.
    count: int
        The size of the request.
    bound: int
        The bound that has been exceeded.
    """

    def __init__(self, message: str, count: int, bound: int) -> None:
        super().__init__(message)
        self.count = count
        self.bound = bound


class InstrumentationError(RuntimeError):
    """
    Exception raised when the instrumentation attached to a set of operations is inconsistent.
    """


class HistoryParseError(ValueError):
    """
    Exception raised when a history or records file cannot be parsed.

    Arguments
    ---------
    message: str
        The description of the problem.
    lineno: Optional[int]
        The 1-based line number at which the problem was found.
    """

    def __init__(self, message: str, lineno: Optional[int] = None) -> None:
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
