import logging

import numpy as np

from typing import Dict, List, Tuple

from bitswap.core.history import History, OperationSpan
from bitswap.core.swap import SwapMetrics, SwapRecord
from bitswap.exceptions import ContractViolation
from bitswap.functions.linearizability import Verdict

logger = logging.getLogger(__name__)


def check_step_bound(records: List[SwapRecord]) -> Verdict:
    """
    Checks that every swap performed two or three base-object operations, and three exactly
    when the parity test failed and the round was incremented.
    """
    for record in records:
        if record.base_ops not in (2, 3):
            return Verdict.fail(None, f"operation {(record.proc, record.op_id)} performed {record.base_ops} base operations")
        if (record.base_ops == 3) != record.incremented:
            return Verdict.fail(None, f"operation {(record.proc, record.op_id)} performed {record.base_ops} base operations "
                                      f"with incremented={record.incremented}")
    return Verdict.ok()


def check_round_bound(metrics: SwapMetrics, b: int) -> Verdict:
    """
    Checks that the final value of `maxRound` exceeds the initial value by at most the number of
    swaps (each swap raises it at most once).
    """
    if metrics.max_round_final - b > metrics.total_swaps:
        return Verdict.fail(None, f"maxRound reached {metrics.max_round_final} after {metrics.total_swaps} swaps from {b}")
    return Verdict.ok()


def check_real_time_rounds(records: List[SwapRecord], history: History) -> Tuple[Verdict, int]:
    """
    Checks that for every pair of swaps where the first responds before the second is invoked,
    the round of the first does not exceed the round of the second. Every such pair is covered:
    operations are sorted by response, and each operation is compared with the largest round
    among those that responded before its invocation.

    Arguments
    ---------
    records: List[SwapRecord]
        The records of the completed swaps.
    history: History
        The history the records belong to.

    Returns
    -------
    Tuple[Verdict, int]
        The verdict and the number of ordered (non-overlapping) pairs covered by the check.
    """
    if not records:
        return Verdict.ok(), 0

    spans = {span.key: span for span in history.operations() if not span.pending}
    try:
        invoke = np.array([spans[(rec.proc, rec.op_id)].invoke_seq for rec in records], dtype=np.int64)
        response = np.array([spans[(rec.proc, rec.op_id)].response_seq for rec in records], dtype=np.int64)
    except KeyError as key:
        raise ContractViolation(f"Record {key} has no completed operation in the history")
    rounds = np.array([rec.r for rec in records], dtype=np.int64)

    order = np.argsort(response, kind="stable")
    sorted_response = response[order]
    prefix_max = np.maximum.accumulate(rounds[order])

    before = np.searchsorted(sorted_response, invoke, side="left")
    pairs = int(before.sum())

    has_predecessor = before > 0
    largest = np.where(has_predecessor, prefix_max[np.maximum(before - 1, 0)], np.iinfo(np.int64).min)
    violations = np.flatnonzero(largest > rounds)
    if violations.size:
        index = int(violations[0])
        rec = records[index]
        return Verdict.fail(None, f"operation {(rec.proc, rec.op_id)} has round {rec.r} after an earlier operation "
                                  f"with round {int(largest[index])}"), pairs

    logger.debug(f"Real-time round order verified on {pairs} pairs")
    return Verdict.ok(), pairs


def check_max_register_history(spans: List[OperationSpan], initial: int = 0) -> Verdict:
    """
    Checks a max register history. Every completed read must return a value that is at least the
    largest write completed before the read started and at most the largest write started
    before the read ended; reads of each process must never decrease.

    Arguments
    ---------
    spans: List[OperationSpan]
        The `read_max` and `write_max` operations of the execution.
    initial: int
        The initial value of the register.
    """
    writes = [span for span in spans if span.method == "write_max"]
    reads = [span for span in spans if span.method == "read_max" and not span.pending]

    for read in reads:
        lower = max([initial] + [w.argument for w in writes if not w.pending and w.response_seq < read.invoke_seq])
        upper = max([initial] + [w.argument for w in writes if w.invoke_seq < read.response_seq])
        if not lower <= read.result <= upper:
            return Verdict.fail(None, f"read {read.key} returned {read.result} outside [{lower}, {upper}]")

    last: Dict[int, int] = {}
    for read in sorted(reads, key=lambda span: span.invoke_seq):
        previous = last.get(read.proc, initial)
        if read.result < previous:
            return Verdict.fail(None, f"read {read.key} returned {read.result} after {previous} on the same process")
        last[read.proc] = read.result

    return Verdict.ok()
