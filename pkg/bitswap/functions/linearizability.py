from __future__ import annotations

import logging

import numpy as np

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from bitswap.config import MAX_BRUTE_FORCE_OPS
from bitswap.core.base import check_bit
from bitswap.core.history import History, OperationSpan
from bitswap.core.swap import SwapRecord
from bitswap.exceptions import ContractViolation, InstrumentationError, RefusalError

logger = logging.getLogger(__name__)


@dataclass
class Verdict:
    """
    Outcome of a check.

    Attributes
    ----------
    passed: bool
        True if every condition holds.
    clause: Optional[int]
        The number of the first violated condition, None if the check passed.
    reason: str
        A human readable description of the violation (empty if the check passed).
    """

    passed: bool
    clause: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return "pass"
        return f"fail(clause {self.clause}): {self.reason}" if self.clause is not None else f"fail: {self.reason}"

    @classmethod
    def ok(cls) -> Verdict:
        return cls(True)

    @classmethod
    def fail(cls, clause: Optional[int], reason: str) -> Verdict:
        return cls(False, clause, reason)


@dataclass
class LinearizabilityResult:
    """
    Outcome of the brute-force linearizability search.

    Attributes
    ----------
    linearizable: bool
        True if a linearization exists.
    witness: List[OperationSpan]
        A valid linearization when one exists (pending operations that never took effect are
        left out), an empty list otherwise.
    explored: int
        The number of search states visited.
    """

    linearizable: bool
    witness: List[OperationSpan] = field(default_factory=list)
    explored: int = 0

    def __bool__(self) -> bool:
        return self.linearizable


@dataclass
class GroupedLinearization:
    """
    Explicit linearization of a set of swap records: records are grouped by round, groups are
    ordered by increasing round and records inside a group by test-and-set ticket. The preset
    initializer of round b is implicitly the first operation of group b.

    Attributes
    ----------
    groups: List[Tuple[int, List[SwapRecord]]]
        The `(round, records)` pairs in linearization order.
    """

    groups: List[Tuple[int, List[SwapRecord]]] = field(default_factory=list)

    def __len__(self) -> int:
        return sum(len(records) for _, records in self.groups)

    @property
    def indices(self) -> List[int]:
        return [index for index, _ in self.groups]

    def flatten(self) -> List[SwapRecord]:
        return [record for _, records in self.groups for record in records]


def seq_swap_oracle(b: int, inputs: List[int]) -> List[int]:
    """
    Replays a sequence of swaps on a sequential one-bit swap object initialized to `b`.

    Arguments
    ---------
    b: int
        The initial value.
    inputs: List[int]
        The input of each swap, in order.

    Returns
    -------
    List[int]
        The value returned by each swap: `b` for the first one, the previous input afterwards.
    """
    state = check_bit(b, "initial value")
    outputs = []
    for v in inputs:
        outputs.append(state)
        state = check_bit(v, "swap input")
    return outputs


def brute_force_linearizable(history: History, max_ops: int = MAX_BRUTE_FORCE_OPS) -> LinearizabilityResult:
    """
    Decides whether a swap history is linearizable by searching for a total order of the
    completed operations (plus any subset of the pending ones) that respects real-time order and
    that a sequential one-bit swap object would produce. The search extends a linearized prefix
    one operation at a time and memoizes the `(prefix set, object value)` pairs already proven
    to be dead ends.

    Arguments
    ---------
    history: History
        The history to check.
    max_ops: int
        The largest number of completed operations accepted.

    Returns
    -------
    LinearizabilityResult
        The verdict and, if linearizable, a witness order.

    Raises
    ------
    RefusalError
        Exception raised if the history has more than `max_ops` completed operations.
    """
    ops = sorted(history.operations(), key=lambda span: span.invoke_seq)
    completed = [index for index, span in enumerate(ops) if not span.pending]
    if len(completed) > max_ops:
        msg = f"Refusing brute-force check of {len(completed)} completed operations (bound {max_ops})"
        logger.error(msg)
        raise RefusalError(msg, len(completed), max_ops)

    # Operation i cannot be linearized until every completed operation that responded before
    # its invocation has been linearized
    must_precede = [0] * len(ops)
    for i, op in enumerate(ops):
        for j in completed:
            if ops[j].response_seq < op.invoke_seq:
                must_precede[i] |= 1 << j

    completed_mask = sum(1 << j for j in completed)
    dead_ends: Set[Tuple[int, int]] = set()
    order: List[int] = []
    explored = 0

    def search(mask: int, state: int) -> bool:
        nonlocal explored
        explored += 1
        if mask & completed_mask == completed_mask:
            return True
        if (mask, state) in dead_ends:
            return False

        for i, op in enumerate(ops):
            if mask >> i & 1 or must_precede[i] & ~mask:
                continue
            if not op.pending and op.result != state:
                continue
            order.append(i)
            if search(mask | 1 << i, op.argument):
                return True
            order.pop()

        dead_ends.add((mask, state))
        return False

    linearizable = search(0, history.init_value)
    logger.debug(f"Brute-force search over {len(ops)} operations visited {explored} states")

    witness = [ops[i] for i in order] if linearizable else []
    return LinearizabilityResult(linearizable, witness, explored)


def explicit_linearize(records: List[SwapRecord], b: int) -> GroupedLinearization:
    """
    Builds the explicit linearization of a set of completed swaps: records sharing a round form
    a group, groups are sorted by round and each group by test-and-set ticket.

    Arguments
    ---------
    records: List[SwapRecord]
        The records of every completed operation.
    b: int
        The initial value of the swap object.

    Returns
    -------
    GroupedLinearization
        The grouped order.

    Raises
    ------
    InstrumentationError
        Exception raised if two records share the same round and ticket.
    """
    check_bit(b, "initial value")
    groups: Dict[int, List[SwapRecord]] = {}
    seen: Set[Tuple[int, int]] = set()
    for record in records:
        if (record.r, record.ticket) in seen:
            raise InstrumentationError(f"Duplicate ticket {record.ticket} in round {record.r}")
        seen.add((record.r, record.ticket))
        groups.setdefault(record.r, []).append(record)

    return GroupedLinearization(
        [(index, sorted(groups[index], key=lambda record: record.ticket)) for index in sorted(groups)]
    )


def verify_explicit(grouping: GroupedLinearization, history: History, b: int) -> Verdict:
    """
    Verifies that the explicit linearization of a complete history is correct. The conditions
    are checked in order and the first violated one is reported:

    1. the flattened order is consistent with the real-time order of the history;
    2. replaying the flattened inputs on a sequential swap object reproduces every returned bit;
    3. the round of every record has the parity of its input;
    4. the rounds present have no gaps above b + 1 (and none is below b);
    5. every round has exactly one test-and-set winner, which comes first, except round b which
       has none.

    Arguments
    ---------
    grouping: GroupedLinearization
        The explicit linearization built from the records of the history.
    history: History
        The complete history.
    b: int
        The initial value of the swap object.

    Returns
    -------
    Verdict
        The verdict, naming the first violated condition on failure.

    Raises
    ------
    ContractViolation
        Exception raised if the history is not complete or if the records do not match the
        operations of the history one to one.
    """
    if not history.is_complete:
        raise ContractViolation("The explicit verifier requires a complete history")

    spans = {span.key: span for span in history.operations()}
    flat = grouping.flatten()
    keys = [(record.proc, record.op_id) for record in flat]
    if len(set(keys)) != len(keys) or set(keys) != set(spans):
        raise ContractViolation(f"The {len(keys)} records do not match the {len(spans)} operations of the history")

    if not flat:
        return Verdict.ok()

    # 1. no operation is placed after one that completed before it started
    invoke = np.array([spans[key].invoke_seq for key in keys], dtype=np.int64)
    response = np.array([spans[key].response_seq for key in keys], dtype=np.int64)
    later_min = np.append(np.minimum.accumulate(response[::-1])[::-1][1:], np.iinfo(np.int64).max)
    violations = np.flatnonzero(later_min < invoke)
    if violations.size:
        position = int(violations[0])
        return Verdict.fail(1, f"operation {keys[position]} is linearized before an operation that completed before it started")

    # 2. sequential replay
    expected = seq_swap_oracle(b, [spans[key].argument for key in keys])
    for key, record, value in zip(keys, flat, expected):
        if spans[key].result != value or record.returned != value:
            return Verdict.fail(2, f"operation {key} returned {spans[key].result}, the sequential replay gives {value}")

    # 3. parity of the rounds
    for key, record in zip(keys, flat):
        if record.v != spans[key].argument or record.r % 2 != record.v:
            return Verdict.fail(3, f"operation {key} has round {record.r} and input {spans[key].argument}")

    # 4. gap freedom
    present = set(grouping.indices)
    for index in grouping.indices:
        if index < b:
            return Verdict.fail(4, f"round {index} is below the initial round {b}")
        if index > b + 1 and index - 1 not in present:
            return Verdict.fail(4, f"round {index} is present but round {index - 1} is empty")

    # 5. one winner per round, first in its group
    for index, records in grouping.groups:
        winners = [record for record in records if record.tas_result == 0]
        if index == b:
            if winners:
                return Verdict.fail(5, f"round {index} has a winner although its bit is preset")
        elif len(winners) != 1:
            return Verdict.fail(5, f"round {index} has {len(winners)} winners")
        elif records[0] is not winners[0]:
            return Verdict.fail(5, f"the winner of round {index} is not the first operation of its group")

    return Verdict.ok()
