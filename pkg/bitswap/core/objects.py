from __future__ import annotations

import logging

from abc import ABC, abstractmethod
from dataclasses import dataclass
from threading import Lock
from typing import Callable, Optional, Tuple

from bitswap.config import Backend
from bitswap.constants import MAX_WORD, PRESET_TICKET, WORD_BITS
from bitswap.core.atomics import AtomicCell, AtomicCounter
from bitswap.core.base import Steps, complete
from bitswap.exceptions import ContractViolation

logger = logging.getLogger(__name__)

# A ticket source is called inside the atomic section of a test-and-set and returns a value
# that is unique and monotone in real time.
TicketSource = Callable[[], int]

# Process-wide ticket counter shared by every test-and-set bit built without an explicit source
GLOBAL_TICKETS = AtomicCounter()


@dataclass
class StepCounter:
    """
    Counts the base-object operations attributed to one high-level operation. The unit depends
    on the object: one unit per operation for atomic objects, one unit per underlying register
    access for register-based ones.

    Attributes
    ----------
    count: int
        The number of units accumulated so far.
    """

    count: int = 0

    def add(self, units: int = 1) -> None:
        self.count += units


def _charge(counter: Optional[StepCounter], units: int = 1) -> None:
    if counter is not None:
        counter.add(units)


class RegisterCell:
    """
    Atomic read-write register holding an unsigned integer of fixed width.

    Arguments
    ---------
    width: int
        The number of bits of the register (default: 64).
    value: int
        The initial value (default: 0).

    Raises
    ------
    ContractViolation
        Exception raised if the width is not positive or the initial value does not fit.
    """

    def __init__(self, width: int = WORD_BITS, value: int = 0) -> None:
        if width <= 0:
            raise ContractViolation(f"The register width must be positive, got {width}")
        self.width = width
        self.__check(value)
        self.__cell: AtomicCell[int] = AtomicCell(value)

    def __check(self, x: int) -> None:
        if x < 0 or x >= (1 << self.width):
            raise ContractViolation(f"The value {x} does not fit in a {self.width}-bit register")

    def read_steps(self, counter: Optional[StepCounter] = None) -> Steps[int]:
        yield "reg_read"
        _charge(counter)
        return self.__cell.get()

    def write_steps(self, x: int, counter: Optional[StepCounter] = None) -> Steps[None]:
        self.__check(x)
        yield "reg_write"
        _charge(counter)
        self.__cell.set(x)

    def read(self, counter: Optional[StepCounter] = None) -> int:
        return complete(self.read_steps(counter))

    def write(self, x: int, counter: Optional[StepCounter] = None) -> None:
        """
        Writes `x` into the register.

        Raises
        ------
        ContractViolation
            Exception raised if `x` does not fit in the register width.
        """
        complete(self.write_steps(x, counter))


class TasBit:
    """
    One-shot test-and-set bit. The first `tas` call returns 0 and every later call returns 1. A
    ticket is drawn inside the atomic section of every call, so that tickets taken on the same
    bit follow the order in which the calls took effect.

    Arguments
    ---------
    tickets: Optional[TicketSource]
        The ticket source (default: the process-wide `GLOBAL_TICKETS` counter).
    preset: bool
        If set to True the bit starts at 1, as if a winning `tas` had been performed before the
        execution began. Its winner ticket is `PRESET_TICKET`.
    """

    def __init__(self, tickets: Optional[TicketSource] = None, preset: bool = False) -> None:
        self.__tickets: TicketSource = tickets if tickets is not None else GLOBAL_TICKETS.draw
        self.__lock = Lock()
        self.__state: int = 1 if preset else 0
        self.preset: bool = preset
        self.winner_ticket: Optional[int] = PRESET_TICKET if preset else None

    def tas_steps(self, counter: Optional[StepCounter] = None) -> Steps[Tuple[int, int]]:
        yield "tas"
        _charge(counter)
        with self.__lock:
            previous = self.__state
            self.__state = 1
            ticket = self.__tickets()
            if previous == 0:
                self.winner_ticket = ticket
        return previous, ticket

    def tas(self, counter: Optional[StepCounter] = None) -> Tuple[int, int]:
        """
        Sets the bit to 1 and returns the previous value together with the ticket of the call.

        Returns
        -------
        Tuple[int, int]
            The previous value of the bit and the ticket drawn at the atomic point.
        """
        return complete(self.tas_steps(counter))


def preset_tas_bit(tickets: Optional[TicketSource] = None) -> TasBit:
    """
    Returns a test-and-set bit on which every `tas` returns 1.
    """
    return TasBit(tickets=tickets, preset=True)


class MaxRegister(ABC):
    """
    Abstract max register: `read_max` returns the largest value written so far (or the initial
    value). Implementations provide the step generators; the direct methods drive them.
    """

    backend: Backend

    @property
    @abstractmethod
    def capacity(self) -> Optional[int]:
        """The number of representable values, None if limited only by the machine word."""

    @abstractmethod
    def read_max_steps(self, counter: Optional[StepCounter] = None) -> Steps[int]:
        pass

    @abstractmethod
    def write_max_steps(self, x: int, counter: Optional[StepCounter] = None) -> Steps[None]:
        pass

    @abstractmethod
    def max_steps(self) -> int:
        """The largest number of atomic accesses a single read or write can perform."""

    def read_max(self, counter: Optional[StepCounter] = None) -> int:
        return complete(self.read_max_steps(counter))

    def write_max(self, x: int, counter: Optional[StepCounter] = None) -> None:
        complete(self.write_max_steps(x, counter))


class AtomicMaxRegister(MaxRegister):
    """
    Max register stored in a single 64-bit word. A write raises the word with a compare-and-swap
    retry loop; the whole loop is one base-object operation and is charged a single unit.

    Arguments
    ---------
    initial: int
        The initial value (default: 0).
    """

    backend = Backend.ATOMIC

    def __init__(self, initial: int = 0) -> None:
        self.__check(initial)
        self.__word: AtomicCell[int] = AtomicCell(initial)

    def __check(self, x: int) -> None:
        # The word is considered unbounded: 2^64 swaps are out of reach of any real run
        if x < 0 or x > MAX_WORD:
            raise ContractViolation(f"The value {x} does not fit in a {WORD_BITS}-bit word")

    @property
    def capacity(self) -> Optional[int]:
        return None

    def max_steps(self) -> int:
        return 1

    def read_max_steps(self, counter: Optional[StepCounter] = None) -> Steps[int]:
        yield "read_max"
        _charge(counter)
        return self.__word.get()

    def write_max_steps(self, x: int, counter: Optional[StepCounter] = None) -> Steps[None]:
        self.__check(x)
        yield "write_max"
        _charge(counter)
        while True:
            current = self.__word.get()
            if current >= x:
                return
            if self.__word.compare_and_set(current, x):
                return


def new_max_register(backend: Backend, capacity: Optional[int] = None, initial: int = 0) -> MaxRegister:
    """
    Builds a max register with the requested backend.

    Arguments
    ---------
    backend: Backend
        The implementation to use.
    capacity: Optional[int]
        The capacity of the register-tree backend (a power of two). Ignored by the atomic backend.
    initial: int
        The initial value of the register.

    Raises
    ------
    ContractViolation
        Exception raised if the register-tree backend is requested without a capacity.
    """
    if backend == Backend.ATOMIC:
        return AtomicMaxRegister(initial)

    if capacity is None:
        raise ContractViolation("The register-tree backend requires a capacity")

    from bitswap.core.maxreg_tree import TreeMaxRegister

    register = TreeMaxRegister(capacity)
    if initial:
        register.write_max(initial)
    return register
