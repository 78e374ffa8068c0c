from __future__ import annotations

import logging

from dataclasses import dataclass, asdict
from typing import Iterable, List, Optional, Tuple

from bitswap.config import Backend, InitMode
from bitswap.constants import TAS_MAX_SEGMENTS, TAS_SEGMENT_BASE
from bitswap.core.atomics import AtomicCell
from bitswap.core.base import Steps, check_bit, complete
from bitswap.core.objects import GLOBAL_TICKETS, StepCounter, TasBit, TicketSource, new_max_register, preset_tas_bit
from bitswap.exceptions import ContractViolation

logger = logging.getLogger(__name__)


@dataclass
class SwapRecord:
    """
    Instrumentation of a single swap operation.

    Attributes
    ----------
    proc: int
        The process that invoked the operation.
    op_id: int
        The per-process operation counter.
    v: int
        The input bit.
    r: int
        The round on which the test-and-set has been performed.
    tas_result: int
        The value returned by the test-and-set on `bits[r]`.
    ticket: int
        The ticket drawn by the test-and-set.
    base_ops: int
        The number of base-object operations (2 or 3).
    register_ops: int
        The number of units charged by the base objects (equal to `base_ops` on the atomic backend,
        register accesses plus the test-and-set on the register-tree backend).
    returned: int
        The bit returned to the caller.
    incremented: bool
        True if the parity test failed and the round was incremented and written.
    """

    proc: int
    op_id: int
    v: int
    r: int
    tas_result: int
    ticket: int
    base_ops: int
    register_ops: int
    returned: int
    incremented: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SwapMetrics:
    """
    Aggregated figures of a run on one swap object.

    Attributes
    ----------
    total_swaps: int
        The number of completed swap operations.
    switch_count: int
        The number of rounds above the initial value with a winning test-and-set, i.e. the
        number of times the object changed its value.
    max_round_final: int
        The value of `maxRound` at quiescence.
    """

    total_swaps: int
    switch_count: int
    max_round_final: int


class TasArray:
    """
    Unbounded array of test-and-set bits. Storage is a sequence of segments of doubling size
    (`TAS_SEGMENT_BASE`, twice that, ...); a segment is created on the first access to one of its
    slots and published with a single compare-and-set. When two threads race to publish the
    same segment the first one wins and the other discards its copy.

    Arguments
    ---------
    tickets: TicketSource
        The ticket source shared by every bit of the array.
    preset_index: Optional[int]
        The index of the bit that must start at 1, if any. Must lie in the first segment.
    """

    def __init__(self, tickets: TicketSource, preset_index: Optional[int] = None) -> None:
        self.__tickets = tickets
        self.__segments: List[AtomicCell] = [AtomicCell(None) for _ in range(TAS_MAX_SEGMENTS)]

        if preset_index is not None:
            if not 0 <= preset_index < TAS_SEGMENT_BASE:
                raise ContractViolation(f"The preset index {preset_index} is outside the first segment")
            segment = self.__new_segment(0)
            segment[preset_index] = preset_tas_bit(tickets)
            self.__segments[0].set(segment)

    @staticmethod
    def locate(index: int) -> Tuple[int, int]:
        """
        Returns the segment number and the offset within the segment of a given index.
        """
        if index < 0:
            raise ContractViolation(f"Invalid test-and-set index {index}")
        segment = (index // TAS_SEGMENT_BASE + 1).bit_length() - 1
        offset = index - TAS_SEGMENT_BASE * ((1 << segment) - 1)
        return segment, offset

    def __new_segment(self, segment: int) -> List[TasBit]:
        return [TasBit(self.__tickets) for _ in range(TAS_SEGMENT_BASE << segment)]

    def __getitem__(self, index: int) -> TasBit:
        segment, offset = self.locate(index)
        if segment >= TAS_MAX_SEGMENTS:
            raise ContractViolation(f"The test-and-set index {index} is beyond the addressable range")

        slot = self.__segments[segment]
        bits = slot.get()
        if bits is None:
            if slot.compare_and_set(None, self.__new_segment(segment)):
                logger.debug(f"Published test-and-set segment {segment} ({TAS_SEGMENT_BASE << segment} bits)")
            bits = slot.get()
        return bits[offset]

    @property
    def materialized(self) -> int:
        """The number of slots belonging to published segments."""
        return sum(TAS_SEGMENT_BASE << s for s, slot in enumerate(self.__segments) if slot.get() is not None)


class SwapObject:
    """
    Wait-free one-bit swap object built from a single max register `max_round` and an unbounded
    array of test-and-set bits `bits`. A swap reads `max_round`, moves it to the next round when
    its parity differs from the input, and then plays the test-and-set of that round: the winner
    of a round returns the complement of its input, every other operation returns its input.

    Arguments
    ---------
    init_value: int
        The initial value b of the object (default: 0).
    backend: Backend
        The max register implementation (default: `Backend.ATOMIC`).
    capacity: Optional[int]
        The capacity of the register-tree backend, a power of two larger than `b`.
    tickets: Optional[TicketSource]
        The ticket source of the test-and-set bits (default: the process-wide counter).
    init: InitMode
        `InitMode.PRESET` (default) sets `max_round` to b and presets `bits[b]`. `InitMode.REPLAY`
        starts from an all-zero structure and runs a Swap(b) whose result is discarded.

    Raises
    ------
    ContractViolation
        Exception raised if `init_value` is not a bit.
    """

    def __init__(
        self,
        init_value: int = 0,
        backend: Backend = Backend.ATOMIC,
        capacity: Optional[int] = None,
        tickets: Optional[TicketSource] = None,
        init: InitMode = InitMode.PRESET,
    ) -> None:
        self.init_value: int = check_bit(init_value, "initial value")
        self.backend: Backend = backend
        self.init_mode: InitMode = init
        tickets = tickets if tickets is not None else GLOBAL_TICKETS.draw

        if init == InitMode.PRESET:
            self.max_round = new_max_register(backend, capacity, initial=self.init_value)
            self.bits = TasArray(tickets, preset_index=self.init_value)
        else:
            self.max_round = new_max_register(backend, capacity)
            self.bits = TasArray(tickets)
            complete(self.swap_steps(self.init_value))

        logger.debug(f"Swap object initialized to {self.init_value} ({backend.value}, {init.value})")

    def swap_steps(self, v: int, proc: int = 0, op_id: int = 0) -> Steps[Tuple[int, SwapRecord]]:
        v = check_bit(v, "swap input")
        counter = StepCounter()

        r = yield from self.max_round.read_max_steps(counter)
        base_ops = 1

        incremented = False
        if r % 2 != v:
            r += 1
            incremented = True
            yield from self.max_round.write_max_steps(r, counter)
            base_ops += 1

        tas_result, ticket = yield from self.bits[r].tas_steps(counter)
        base_ops += 1

        returned = 1 - v if tas_result == 0 else v
        record = SwapRecord(
            proc=proc,
            op_id=op_id,
            v=v,
            r=r,
            tas_result=tas_result,
            ticket=ticket,
            base_ops=base_ops,
            register_ops=counter.count,
            returned=returned,
            incremented=incremented,
        )
        return returned, record

    def swap(self, v: int, proc: int = 0, op_id: int = 0) -> Tuple[int, SwapRecord]:
        """
        Atomically replaces the content of the object with `v` and returns the previous content.

        Arguments
        ---------
        v: int
            The new value of the object.
        proc: int
            The identifier of the calling process, copied in the record.
        op_id: int
            The per-process operation counter, copied in the record.

        Returns
        -------
        Tuple[int, SwapRecord]
            The previous content of the object and the instrumentation record of the call.

        Raises
        ------
        ContractViolation
            Exception raised if `v` is not a bit.
        CapacityError
            Exception raised if the register-tree backend is exhausted.
        """
        return complete(self.swap_steps(v, proc, op_id))

    def probe(self) -> int:
        """
        Returns the current value of the object. Only meaningful at quiescence: the last
        operation of the linearization belongs to the highest round, whose parity is its input.
        """
        return self.max_round.read_max() % 2


def swap_new(
    b: int,
    backend: Backend = Backend.ATOMIC,
    capacity: Optional[int] = None,
    tickets: Optional[TicketSource] = None,
    init: InitMode = InitMode.PRESET,
) -> SwapObject:
    """
    Builds a swap object initialized to `b`. See `SwapObject` for the meaning of the arguments.
    """
    return SwapObject(b, backend=backend, capacity=capacity, tickets=tickets, init=init)


def metrics(swap_object: SwapObject, records: Iterable[SwapRecord]) -> SwapMetrics:
    """
    Computes the metrics of a quiescent swap object from the records of its operations.

    Arguments
    ---------
    swap_object: SwapObject
        The swap object on which the operations have been performed.
    records: Iterable[SwapRecord]
        The records of all the completed operations.

    Returns
    -------
    SwapMetrics
        The number of swaps, the number of value changes and the final round.
    """
    b = swap_object.init_value
    total, winning_rounds = 0, set()
    for record in records:
        total += 1
        if record.tas_result == 0 and record.r > b:
            winning_rounds.add(record.r)

    return SwapMetrics(
        total_swaps=total,
        switch_count=len(winning_rounds),
        max_round_final=swap_object.max_round.read_max(),
    )


class TestAndSetResetBit:
    """
    A one-bit swap object seen as a test-and-set bit extended with a test-and-reset operation.
    Both operations return the previous value of the bit.

    Arguments
    ---------
    swap_object: Optional[SwapObject]
        The underlying swap object. If set to None (default) a new object initialized to 0 is built.
    """

    __test__ = False

    def __init__(self, swap_object: Optional[SwapObject] = None) -> None:
        self.swap_object = swap_object if swap_object is not None else SwapObject(0)

    def test_and_set(self) -> int:
        return self.swap_object.swap(1)[0]

    def test_and_reset(self) -> int:
        return self.swap_object.swap(0)[0]
