from typing import Generator, TypeVar

from bitswap.config import Backend
from bitswap.exceptions import ContractViolation

T = TypeVar("T")

# A step generator yields a short label right before each atomic base-object access and
# returns the result of the operation once exhausted.
Steps = Generator[str, None, T]


def complete(steps: Steps[T]) -> T:
    """
    Drives a step generator to completion without any interleaving and returns its result.

    Arguments
    ---------
    steps: Steps[T]
        The generator encoding the operation.

    Returns
    -------
    T
        The value returned by the operation.
    """
    while True:
        try:
            next(steps)
        except StopIteration as stop:
            return stop.value


def check_bit(value: int, name: str = "value") -> int:
    """
    Checks that the given value is a bit and returns it.

    Raises
    ------
    ContractViolation
        Exception raised if the value is not 0 or 1.
    """
    if value not in (0, 1):
        raise ContractViolation(f"The {name} must be a bit (0 or 1), got {value!r}")
    return int(value)


class Engine:
    """
    Simple base class for the definition of an execution engine. The class sets the `backend`
    and `description` attributes.

    Arguments
    ---------
    backend: Backend
        The max register backend used by the swap objects the engine builds.
    """

    def __init__(self, backend: Backend = Backend.ATOMIC) -> None:
        if not isinstance(backend, Backend):
            raise TypeError("The backend argument must be a `Backend` member")
        self.backend = backend
        self.description = f"{self.__class__.__name__} || backend: {self.backend.value}"
