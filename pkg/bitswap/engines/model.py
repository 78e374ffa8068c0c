from __future__ import annotations

import math
import logging

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Union

from bitswap.config import MAX_SCHEDULE_STEPS, Backend, InitMode
from bitswap.constants import PRESET_TICKET
from bitswap.core.base import Engine, Steps, check_bit
from bitswap.core.history import Event, EventKind, History, OperationSpan
from bitswap.core.objects import MaxRegister, new_max_register
from bitswap.core.swap import SwapMetrics, SwapObject, SwapRecord, metrics
from bitswap.exceptions import ContractViolation, RefusalError
from bitswap.tools.prng import XorShift64Star

logger = logging.getLogger(__name__)

SWAP_METHODS = ("swap",)
MAX_REGISTER_METHODS = ("read_max", "write_max")

# Sequence of process identifiers: entry k means "process p executes its next base-object step"
Schedule = List[int]


@dataclass(frozen=True)
class Invocation:
    """
    A high-level operation a process will invoke.

    Attributes
    ----------
    method: str
        One of "swap", "read_max" or "write_max".
    argument: Optional[int]
        The input bit of a swap or the value of a write_max. None for read_max.
    """

    method: str
    argument: Optional[int] = None


@dataclass
class ProcessProgram:
    """
    The ordered list of operations a process invokes, one after the other.

    Attributes
    ----------
    invocations: List[Invocation]
        The operations of the process.
    """

    invocations: List[Invocation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.invocations)

    @classmethod
    def swaps(cls, inputs: Iterable[int]) -> ProcessProgram:
        """
        Builds a program of swap operations with the given input bits.
        """
        return cls([Invocation("swap", check_bit(v, "swap input")) for v in inputs])

    @property
    def inputs(self) -> List[Optional[int]]:
        return [invocation.argument for invocation in self.invocations]


@dataclass
class ExecutionOutcome:
    """
    Everything observed during one execution.

    Attributes
    ----------
    history: Optional[History]
        The swap history (None for max register programs).
    records: List[SwapRecord]
        The records of the completed swaps, ordered by process and operation counter.
    final_value: Optional[int]
        The value of the swap object probed at quiescence (None for max register programs).
    spans: List[OperationSpan]
        Every operation with its invocation and response sequence numbers and step count.
    schedule: Schedule
        The sequence of process identifiers that has been executed.
    metrics: Optional[SwapMetrics]
        The metrics of the swap object at quiescence (None for max register programs).
    durations_ns: List[int]
        Wall-clock duration of every swap in nanoseconds, filled only by timed thread runs.
    """

    history: Optional[History]
    records: List[SwapRecord]
    final_value: Optional[int]
    spans: List[OperationSpan]
    schedule: Schedule = field(default_factory=list)
    metrics: Optional[SwapMetrics] = None
    durations_ns: List[int] = field(default_factory=list)

    @property
    def returned(self) -> List[int]:
        return [record.returned for record in self.records]


def count_interleavings(step_counts: List[int]) -> int:
    """
    Returns the number of distinct interleavings of processes taking the given numbers of
    steps (the multinomial coefficient of the step counts).
    """
    total, count = 0, 1
    for steps in step_counts:
        total += steps
        count *= math.comb(total, steps)
    return count


def program_kind(programs: List[ProcessProgram]) -> str:
    """
    Returns "swap" or "max_register" depending on the operations of the programs.

    Raises
    ------
    ContractViolation
        Exception raised if an unknown method is used or if swap and max register operations
        are mixed.
    """
    methods = {invocation.method for program in programs for invocation in program.invocations}
    unknown = methods - set(SWAP_METHODS) - set(MAX_REGISTER_METHODS)
    if unknown:
        raise ContractViolation(f"Unknown methods {sorted(unknown)}")
    if methods & set(SWAP_METHODS) and methods & set(MAX_REGISTER_METHODS):
        raise ContractViolation("Swap and max register operations cannot be mixed in one execution")
    return "max_register" if methods & set(MAX_REGISTER_METHODS) else "swap"


class _Simulation:
    """
    Step-level state of one deterministic execution. The step index of the scheduler doubles
    as the ticket source of the test-and-set bits.
    """

    def __init__(
        self,
        programs: List[ProcessProgram],
        init_value: int,
        backend: Backend,
        capacity: Optional[int],
        init_mode: InitMode,
    ) -> None:
        self.kind = program_kind(programs)
        self.programs = programs
        self.init_value = check_bit(init_value, "initial value")
        self.clock = PRESET_TICKET

        self.target: Union[SwapObject, MaxRegister]
        if self.kind == "swap":
            self.target = SwapObject(init_value, backend=backend, capacity=capacity, tickets=self.ticket, init=init_mode)
        else:
            self.target = new_max_register(backend, capacity)

        nprocs = len(programs)
        self.next_op: List[int] = [0] * nprocs
        self.active: List[Optional[Steps]] = [None] * nprocs
        self.labels: List[Optional[str]] = [None] * nprocs
        self.open_spans: List[Optional[OperationSpan]] = [None] * nprocs

        self.step_index = 0
        self.seq = 0
        self.events: List[Event] = []
        self.spans: List[OperationSpan] = []
        self.records: List[SwapRecord] = []
        self.schedule: Schedule = []

    def ticket(self) -> int:
        return self.clock

    def has_steps(self, proc: int) -> bool:
        return self.active[proc] is not None or self.next_op[proc] < len(self.programs[proc])

    def runnable(self) -> List[int]:
        return [proc for proc in range(len(self.programs)) if self.has_steps(proc)]

    def __emit(self, proc: int, op_id: int, kind: EventKind, value: Optional[int]) -> int:
        seq = self.seq
        self.seq += 1
        if self.kind == "swap":
            self.events.append(Event(seq, proc, op_id, kind, value))
        return seq

    def __start(self, proc: int) -> None:
        op_id = self.next_op[proc]
        invocation = self.programs[proc].invocations[op_id]
        self.next_op[proc] += 1

        if invocation.method == "swap":
            steps = self.target.swap_steps(invocation.argument, proc, op_id)
            invoke_value = invocation.argument
        elif invocation.method == "read_max":
            steps = self.target.read_max_steps()
            invoke_value = 0
        else:
            steps = self.target.write_max_steps(invocation.argument)
            invoke_value = invocation.argument

        seq = self.__emit(proc, op_id, EventKind.INVOKE, invoke_value)
        self.open_spans[proc] = OperationSpan(proc, op_id, invocation.method, invocation.argument, None, seq)

        try:
            self.labels[proc] = next(steps)
        except StopIteration:
            raise ContractViolation(f"Operation {invocation.method} of process {proc} takes no step")
        self.active[proc] = steps

    def __finish(self, proc: int, value) -> None:
        span = self.open_spans[proc]
        if span.method == "swap":
            returned, record = value
            self.records.append(record)
            span.result = returned
        else:
            span.result = value

        span.response_seq = self.__emit(proc, span.op_id, EventKind.RESPONSE, span.result)
        self.spans.append(span)
        self.active[proc] = None
        self.labels[proc] = None
        self.open_spans[proc] = None

    def step(self, proc: int) -> None:
        if not 0 <= proc < len(self.programs) or not self.has_steps(proc):
            raise ContractViolation(f"Malformed schedule: process {proc} has no remaining step at index {self.step_index}")

        if self.active[proc] is None:
            self.__start(proc)

        logger.debug("step %d: process %d performs %s", self.step_index, proc, self.labels[proc])
        self.clock = self.step_index
        self.open_spans[proc].steps += 1
        try:
            self.labels[proc] = next(self.active[proc])
        except StopIteration as stop:
            self.__finish(proc, stop.value)

        self.schedule.append(proc)
        self.step_index += 1

    def outcome(self) -> ExecutionOutcome:
        self.spans.sort(key=lambda span: span.invoke_seq)
        self.records.sort(key=lambda record: (record.proc, record.op_id))

        if self.kind == "swap":
            return ExecutionOutcome(
                history=History(self.init_value, self.events),
                records=self.records,
                final_value=self.target.probe(),
                spans=self.spans,
                schedule=self.schedule,
                metrics=metrics(self.target, self.records),
            )

        return ExecutionOutcome(history=None, records=[], final_value=None, spans=self.spans, schedule=self.schedule)


class ModelEngine(Engine):
    """
    Deterministic step-level executor. Processes run their programs over simulated base objects
    and a scheduler decides, one base-object operation at a time, which process moves next.
    Schedules are either given explicitly, enumerated exhaustively, or drawn from a seeded
    xorshift generator.

    Arguments
    ---------
    backend: Backend
        The max register backend (default: `Backend.ATOMIC`).
    capacity: Optional[int]
        The register-tree capacity. Must be at least 2 so that every operation takes a step.
    init_mode: InitMode
        How swap objects reach their initial value (default: `InitMode.PRESET`).
    max_steps: int
        The largest worst-case step total `enumerate_schedules` accepts.
    allow_regtree: bool
        If set to True the register-tree backend can be explored exhaustively. Every register
        access is then a scheduler step, so only tiny capacities are practical.
    """

    def __init__(
        self,
        backend: Backend = Backend.ATOMIC,
        capacity: Optional[int] = None,
        init_mode: InitMode = InitMode.PRESET,
        max_steps: int = MAX_SCHEDULE_STEPS,
        allow_regtree: bool = False,
    ) -> None:
        super().__init__(backend)
        if backend == Backend.REGTREE and (capacity is None or capacity < 2):
            raise ContractViolation("The model executor requires a register-tree capacity of at least 2")
        self.capacity = capacity
        self.init_mode = init_mode
        self.max_steps = max_steps
        self.allow_regtree = allow_regtree

    def __simulate(self, programs: List[ProcessProgram], init_value: int) -> _Simulation:
        return _Simulation(programs, init_value, self.backend, self.capacity, self.init_mode)

    def worst_case_steps(self, programs: List[ProcessProgram]) -> List[int]:
        """
        Returns, for each process, the largest number of scheduler steps its program can take.
        """
        depth = new_max_register(self.backend, self.capacity).max_steps()
        cost = {"swap": 2 * depth + 1, "read_max": depth, "write_max": depth}
        return [sum(cost[invocation.method] for invocation in program.invocations) for program in programs]

    def run_schedule(self, programs: List[ProcessProgram], schedule: Schedule, init_value: int = 0) -> ExecutionOutcome:
        """
        Executes the programs following the given schedule.

        Arguments
        ---------
        programs: List[ProcessProgram]
            The program of each process.
        schedule: Schedule
            The process executing each step. It must exhaust every program.
        init_value: int
            The initial value of the swap object (ignored by max register programs).

        Returns
        -------
        ExecutionOutcome
            The history, records, spans and final value of the execution.

        Raises
        ------
        ContractViolation
            Exception raised if the schedule names a process without remaining steps or ends
            before every program is complete.
        """
        simulation = self.__replay(programs, init_value, schedule)
        left = simulation.runnable()
        if left:
            raise ContractViolation(f"Malformed schedule: processes {left} still have steps to execute")
        return simulation.outcome()

    def enumerate_schedules(self, programs: List[ProcessProgram], init_value: int = 0) -> Iterator[Schedule]:
        """
        Yields every distinct schedule of the programs exactly once, in lexicographic order.

        Raises
        ------
        RefusalError
            Exception raised if the worst-case step total exceeds `max_steps`, or if the
            register-tree backend is used without `allow_regtree`.
        """
        for outcome in self.enumerate_outcomes(programs, init_value):
            yield outcome.schedule

    def enumerate_outcomes(self, programs: List[ProcessProgram], init_value: int = 0) -> Iterator[ExecutionOutcome]:
        """
        Executes every distinct schedule of the programs exactly once and yields the outcome of
        each, in the order of `enumerate_schedules`. The outcome of a schedule is identical to
        the one `run_schedule` returns for it.

        The search is depth-first over the choice of the next process. Simulations cannot be
        copied, so the first child of a node continues on the simulation of its parent while
        every other child replays the prefix on fresh objects: each schedule is executed once.

        Raises
        ------
        RefusalError
            Exception raised if the worst-case step total exceeds `max_steps`, or if the
            register-tree backend is used without `allow_regtree`.
        """
        if self.backend == Backend.REGTREE and not self.allow_regtree:
            raise RefusalError("Exhaustive exploration of the register-tree backend is disabled", 0, 0)

        worst = self.worst_case_steps(programs)
        total = sum(worst)
        if total > self.max_steps:
            msg = (
                f"Refusing to enumerate {total} worst-case steps (bound {self.max_steps}): "
                f"up to {count_interleavings(worst)} schedules"
            )
            logger.error(msg)
            raise RefusalError(msg, total, self.max_steps)

        logger.info(f"Enumerating schedules for {len(programs)} processes (at most {count_interleavings(worst)})")
        yield from self.__explore(programs, init_value, self.__simulate(programs, init_value))

    def __replay(self, programs: List[ProcessProgram], init_value: int, schedule: Schedule) -> _Simulation:
        simulation = self.__simulate(programs, init_value)
        for proc in schedule:
            simulation.step(proc)
        return simulation

    def __explore(self, programs: List[ProcessProgram], init_value: int, simulation: _Simulation) -> Iterator[ExecutionOutcome]:
        runnable = simulation.runnable()
        if not runnable:
            yield simulation.outcome()
            return

        # Siblings are branched off before the shared simulation moves on
        siblings = [self.__replay(programs, init_value, simulation.schedule + [proc]) for proc in runnable[1:]]
        simulation.step(runnable[0])
        yield from self.__explore(programs, init_value, simulation)

        for sibling in siblings:
            yield from self.__explore(programs, init_value, sibling)

    def run_random(self, programs: List[ProcessProgram], seed: int, init_value: int = 0) -> ExecutionOutcome:
        """
        Executes the programs picking, at every step, a process uniformly among the runnable
        ones with a xorshift64* generator seeded with `seed`. The same seed always produces the
        same outcome.
        """
        rng = XorShift64Star(seed)
        simulation = self.__simulate(programs, init_value)
        while True:
            runnable = simulation.runnable()
            if not runnable:
                break
            simulation.step(runnable[rng.below(len(runnable))])
        return simulation.outcome()
