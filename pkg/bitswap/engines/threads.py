from __future__ import annotations

import time
import logging
import threading

from dataclasses import dataclass, field
from typing import List, Optional

from bitswap.config import Backend, InitMode, get_nthreads
from bitswap.core.atomics import AtomicCounter
from bitswap.core.base import Engine
from bitswap.core.history import Event, EventKind, History, OperationSpan
from bitswap.core.swap import SwapObject, SwapRecord, metrics
from bitswap.engines.model import ExecutionOutcome, ProcessProgram, program_kind
from bitswap.exceptions import ContractViolation

logger = logging.getLogger(__name__)


@dataclass
class _WorkerLog:
    events: List[Event] = field(default_factory=list)
    records: List[SwapRecord] = field(default_factory=list)
    spans: List[OperationSpan] = field(default_factory=list)
    durations_ns: List[int] = field(default_factory=list)
    error: Optional[BaseException] = None


class ThreadEngine(Engine):
    """
    Runs swap programs on real threads sharing a single swap object. Threads are released
    together by a barrier; every invocation and response is stamped with a shared atomic clock
    (invocations before the first step, responses after the last one), so that the order of the
    stamps is consistent with real time. Each thread keeps its own log, and the logs are merged
    once every thread has been joined.

    Arguments
    ---------
    backend: Backend
        The max register backend (default: `Backend.ATOMIC`).
    capacity: Optional[int]
        The register-tree capacity.
    init_mode: InitMode
        How the swap object reaches its initial value (default: `InitMode.PRESET`).
    timed: bool
        If set to True the wall-clock duration of every swap is recorded.
    """

    def __init__(
        self,
        backend: Backend = Backend.ATOMIC,
        capacity: Optional[int] = None,
        init_mode: InitMode = InitMode.PRESET,
        timed: bool = False,
    ) -> None:
        super().__init__(backend)
        self.capacity = capacity
        self.init_mode = init_mode
        self.timed = timed

    def run(self, programs: List[ProcessProgram], init_value: int = 0) -> ExecutionOutcome:
        """
        Runs one thread per program and returns the merged outcome at quiescence.

        Arguments
        ---------
        programs: List[ProcessProgram]
            The swap program of each thread.
        init_value: int
            The initial value of the shared swap object.

        Returns
        -------
        ExecutionOutcome
            The merged history, records, metrics and (if timed) durations of the run.

        Raises
        ------
        ContractViolation
            Exception raised if a program contains operations other than swaps.
        CapacityError
            Exception raised, after every thread has been joined, if a thread exhausted the
            register-tree backend.
        """
        if program_kind(programs) != "swap":
            raise ContractViolation("The thread engine only runs swap programs")

        if len(programs) > get_nthreads():
            logger.warning(f"Running {len(programs)} threads on {get_nthreads()} usable cores")

        tickets = AtomicCounter()
        clock = AtomicCounter()
        target = SwapObject(init_value, backend=self.backend, capacity=self.capacity, tickets=tickets.draw, init=self.init_mode)
        barrier = threading.Barrier(len(programs)) if programs else None
        logs = [_WorkerLog() for _ in programs]

        def worker(proc: int, program: ProcessProgram, log: _WorkerLog) -> None:
            try:
                barrier.wait()
                for op_id, v in enumerate(program.inputs):
                    invoke_seq = clock.draw()
                    start = time.perf_counter_ns() if self.timed else 0
                    returned, record = target.swap(v, proc, op_id)
                    if self.timed:
                        log.durations_ns.append(time.perf_counter_ns() - start)
                    response_seq = clock.draw()

                    log.events.append(Event(invoke_seq, proc, op_id, EventKind.INVOKE, v))
                    log.events.append(Event(response_seq, proc, op_id, EventKind.RESPONSE, returned))
                    log.records.append(record)
                    log.spans.append(OperationSpan(proc, op_id, "swap", v, returned, invoke_seq, response_seq, record.register_ops))
            except BaseException as error:
                log.error = error
                barrier.abort()

        threads = [
            threading.Thread(target=worker, args=(proc, program, log), name=f"swap-worker-{proc}")
            for proc, (program, log) in enumerate(zip(programs, logs))
        ]

        logger.info(f"Starting {len(threads)} threads ({self.description})")
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        for log in logs:
            if log.error is not None and not isinstance(log.error, threading.BrokenBarrierError):
                raise log.error

        events = sorted((event for log in logs for event in log.events), key=lambda event: event.seq)
        records = [record for log in logs for record in log.records]
        spans = sorted((span for log in logs for span in log.spans), key=lambda span: span.invoke_seq)

        return ExecutionOutcome(
            history=History(init_value, events),
            records=records,
            final_value=target.probe(),
            spans=spans,
            metrics=metrics(target, records),
            durations_ns=[duration for log in logs for duration in log.durations_ns],
        )
