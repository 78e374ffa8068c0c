from __future__ import annotations

import os
import logging

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from packaging.version import InvalidVersion, Version

from bitswap.config import __HISTORY_VERSION__
from bitswap.core.base import check_bit
from bitswap.core.swap import SwapRecord
from bitswap.exceptions import ContractViolation, HistoryParseError

logger = logging.getLogger(__name__)

HISTORY_MAGIC = "swap-history"
RECORDS_MAGIC = "swap-records"


class EventKind(Enum):
    INVOKE = "inv"
    RESPONSE = "res"


@dataclass(frozen=True)
class Event:
    """
    A timestamped invocation or response of a swap operation.

    Attributes
    ----------
    seq: int
        The global sequence number of the event (the single clock of an execution).
    proc: int
        The process issuing the event.
    op_id: int
        The per-process operation counter.
    kind: EventKind
        Whether the event is an invocation or a response.
    value: int
        The input bit for an invocation, the returned bit for a response.
    """

    seq: int
    proc: int
    op_id: int
    kind: EventKind
    value: int

    def encode(self) -> str:
        return f"{self.seq} {self.proc} {self.op_id} {self.kind.value} {self.value}"


@dataclass
class OperationSpan:
    """
    A high-level operation reconstructed from its invocation and (optional) response.

    Attributes
    ----------
    proc: int
        The process that invoked the operation.
    op_id: int
        The per-process operation counter.
    method: str
        The name of the operation ("swap", "read_max" or "write_max").
    argument: Optional[int]
        The input of the operation, if any.
    result: Optional[int]
        The returned value, None if the operation is pending or returns nothing.
    invoke_seq: int
        The sequence number of the invocation.
    response_seq: Optional[int]
        The sequence number of the response, None if the operation is pending.
    steps: int
        The number of scheduler steps taken by the operation (0 when not recorded).
    """

    proc: int
    op_id: int
    method: str
    argument: Optional[int]
    result: Optional[int]
    invoke_seq: int
    response_seq: Optional[int] = None
    steps: int = 0

    @property
    def pending(self) -> bool:
        return self.response_seq is None

    @property
    def key(self) -> Tuple[int, int]:
        return self.proc, self.op_id


class History:
    """
    A sequence of swap invocation and response events observed on one object, together with the
    initial value of the object. Well-formedness is enforced on every `append`: sequence numbers
    strictly increase, and the events of each process alternate invocation and response with
    increasing operation counters. Pending invocations are allowed only as the last event of
    their process.

    Arguments
    ---------
    init_value: int
        The initial value b of the swap object (default: 0).
    events: Optional[List[Event]]
        The events to append, in order.

    Raises
    ------
    ContractViolation
        Exception raised if the events are not well formed.
    """

    def __init__(self, init_value: int = 0, events: Optional[List[Event]] = None) -> None:
        self.init_value: int = check_bit(init_value, "initial value")
        self.__events: List[Event] = []
        self.__open: Dict[int, Event] = {}
        self.__last_op: Dict[int, int] = {}
        self.__headerless: bool = False

        for event in events or []:
            self.append(event)

    def __len__(self) -> int:
        return len(self.__events)

    def __iter__(self) -> Iterator[Event]:
        for event in self.__events:
            yield event

    def __getitem__(self, index: int) -> Event:
        return self.__events[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, History):
            return NotImplemented
        return self.init_value == other.init_value and self.__events == other.events

    @property
    def events(self) -> List[Event]:
        return list(self.__events)

    @property
    def is_complete(self) -> bool:
        return not self.__open

    def signature(self) -> Tuple[Tuple[int, int, str, int], ...]:
        """
        Returns the events without their sequence numbers. Histories with the same signature
        and initial value have the same real-time order and the same values.
        """
        return tuple((event.proc, event.op_id, event.kind.value, event.value) for event in self.__events)

    def append(self, event: Event) -> None:
        """
        Appends an event at the end of the history.

        Raises
        ------
        ContractViolation
            Exception raised if the event breaks the well-formedness of the history.
        """
        if self.__events and event.seq <= self.__events[-1].seq:
            raise ContractViolation(f"Sequence number {event.seq} does not follow {self.__events[-1].seq}")
        check_bit(event.value, "event value")

        pending = self.__open.get(event.proc)
        if event.kind == EventKind.INVOKE:
            if pending is not None:
                raise ContractViolation(f"Process {event.proc} invokes operation {event.op_id} while {pending.op_id} is pending")
            if event.op_id <= self.__last_op.get(event.proc, -1):
                raise ContractViolation(f"Operation counter {event.op_id} of process {event.proc} is not increasing")
            self.__open[event.proc] = event
            self.__last_op[event.proc] = event.op_id
        else:
            if pending is None or pending.op_id != event.op_id:
                raise ContractViolation(f"Response of process {event.proc} operation {event.op_id} has no matching invocation")
            del self.__open[event.proc]

        self.__events.append(event)

    def operations(self) -> List[OperationSpan]:
        """
        Returns the swap operations of the history ordered by invocation.
        """
        spans: Dict[Tuple[int, int], OperationSpan] = {}
        for event in self.__events:
            if event.kind == EventKind.INVOKE:
                spans[(event.proc, event.op_id)] = OperationSpan(
                    proc=event.proc,
                    op_id=event.op_id,
                    method="swap",
                    argument=event.value,
                    result=None,
                    invoke_seq=event.seq,
                )
            else:
                span = spans[(event.proc, event.op_id)]
                span.result = event.value
                span.response_seq = event.seq
        return list(spans.values())

    def encode(self) -> str:
        """
        Encodes the history in the text format: a `# swap-history v1 init=<b>` header followed by
        one `seq proc opId kind value` line per event.
        """
        if self.__headerless and not self.__events:
            return ""

        lines = [f"# {HISTORY_MAGIC} v{__HISTORY_VERSION__} init={self.init_value}"]
        lines += [event.encode() for event in self.__events]
        return "\n".join(lines) + "\n"

    @classmethod
    def decode(cls, text: str) -> History:
        """
        Builds a `History` object from its text encoding. An empty text encodes the empty history
        of an object initialized to 0, and the decoded history encodes back to the empty text.

        Raises
        ------
        HistoryParseError
            Exception raised, with the offending line number, if the text cannot be parsed or
            describes a history that is not well formed.
        """
        lines = text.splitlines()
        if not lines:
            obj = cls()
            obj.__headerless = True
            return obj

        init_value = _parse_header(lines[0], HISTORY_MAGIC)
        obj = cls(init_value)

        for lineno, line in enumerate(lines[1:], start=2):
            fields = _split_integers(line, 5, lineno, kinds={3: [k.value for k in EventKind]})
            seq, proc, op_id, kind, value = fields
            try:
                obj.append(Event(seq, proc, op_id, EventKind(kind), value))
            except ContractViolation as error:
                raise HistoryParseError(str(error), lineno) from error

        return obj

    @classmethod
    def from_file(cls, path: str) -> History:
        """
        Loads a history from a text file.

        Raises
        ------
        FileNotFoundError
            Exception raised if the specified file cannot be found.
        """
        if not os.path.isfile(path):
            raise FileNotFoundError(f"The specified history file `{path}` does not exist.")

        with open(path, "r") as file:
            return cls.decode(file.read())

    def save(self, path: str) -> None:
        with open(path, "w") as file:
            file.write(self.encode())
        logger.info(f"History with {len(self)} events saved to {path}")


def _parse_header(line: str, magic: str) -> int:
    fields = line.split(" ")
    if len(fields) != 4 or fields[0] != "#" or fields[1] != magic:
        raise HistoryParseError(f"expected a `# {magic} v<version> init=<b>` header", 1)

    version = fields[2]
    expected = f"v{__HISTORY_VERSION__}"
    if version != expected:
        try:
            relation = "newer" if Version(version.removeprefix("v")) > Version(expected[1:]) else "older or non-canonical"
        except InvalidVersion:
            raise HistoryParseError(f"invalid format version `{version}`", 1)
        raise HistoryParseError(f"unsupported format version `{version}` ({relation} than `{expected}`)", 1)

    if fields[3] not in ("init=0", "init=1"):
        raise HistoryParseError(f"invalid initial value `{fields[3]}`", 1)
    return int(fields[3][5:])


def _split_integers(line: str, nfields: int, lineno: int, kinds: Optional[Dict[int, List[str]]] = None) -> list:
    kinds = kinds if kinds is not None else {}
    fields = line.split(" ")
    if len(fields) != nfields:
        raise HistoryParseError(f"expected {nfields} single-space separated fields, found {len(fields)}", lineno)

    parsed = []
    for index, field in enumerate(fields):
        if index in kinds:
            if field not in kinds[index]:
                raise HistoryParseError(f"invalid field `{field}`, expected one of {kinds[index]}", lineno)
            parsed.append(field)
        elif field.lstrip("-").isdigit() and (field == "0" or not field.lstrip("-").startswith("0")):
            parsed.append(int(field))
        else:
            raise HistoryParseError(f"invalid decimal integer `{field}`", lineno)
    return parsed


def records_path(path: str) -> str:
    """Returns the path of the records sidecar of a history file."""
    return f"{path}.records"


def encode_records(records: List[SwapRecord]) -> str:
    """
    Encodes a list of records in the sidecar format: a `# swap-records v1` header followed by
    one `proc opId r tas ticket steps ret` line per record.
    """
    lines = [f"# {RECORDS_MAGIC} v{__HISTORY_VERSION__}"]
    for rec in records:
        lines.append(f"{rec.proc} {rec.op_id} {rec.r} {rec.tas_result} {rec.ticket} {rec.base_ops} {rec.returned}")
    return "\n".join(lines) + "\n"


def decode_records(text: str, history: History) -> List[SwapRecord]:
    """
    Decodes a records sidecar. The input bit of each record is taken from the matching invocation
    of `history`.

    Raises
    ------
    HistoryParseError
        Exception raised if the text cannot be parsed or a record has no matching invocation.
    """
    lines = text.splitlines()
    if not lines:
        return []
    if lines[0] != f"# {RECORDS_MAGIC} v{__HISTORY_VERSION__}":
        raise HistoryParseError(f"expected a `# {RECORDS_MAGIC} v{__HISTORY_VERSION__}` header", 1)

    inputs = {span.key: span.argument for span in history.operations()}

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        proc, op_id, r, tas_result, ticket, steps, returned = _split_integers(line, 7, lineno)
        if (proc, op_id) not in inputs:
            raise HistoryParseError(f"record of process {proc} operation {op_id} has no invocation in the history", lineno)
        if tas_result not in (0, 1) or returned not in (0, 1) or r < 0:
            raise HistoryParseError("invalid record values", lineno)

        records.append(
            SwapRecord(
                proc=proc,
                op_id=op_id,
                v=inputs[(proc, op_id)],
                r=r,
                tas_result=tas_result,
                ticket=ticket,
                base_ops=steps,
                register_ops=steps,
                returned=returned,
                incremented=steps == 3,
            )
        )
    return records


def save_records(records: List[SwapRecord], path: str) -> None:
    with open(path, "w") as file:
        file.write(encode_records(records))
    logger.info(f"{len(records)} records saved to {path}")


def load_records(path: str, history: History) -> List[SwapRecord]:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"The specified records file `{path}` does not exist.")
    with open(path, "r") as file:
        return decode_records(file.read(), history)
