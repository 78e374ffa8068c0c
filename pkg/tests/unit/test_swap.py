import pytest
import threading

from bitswap.config import Backend, InitMode
from bitswap.core.atomics import AtomicCounter
from bitswap.core.swap import SwapObject, SwapRecord, TasArray, TestAndSetResetBit, metrics, swap_new
from bitswap.exceptions import CapacityError, ContractViolation
from bitswap.functions.linearizability import seq_swap_oracle
from bitswap.tools.prng import XorShift64Star


# Test the TasArray class
# ------------------------------------------------------------------------------------------
@pytest.mark.parametrize(
    "index, expected",
    [(0, (0, 0)), (1, (0, 1)), (2, (1, 0)), (5, (1, 3)), (6, (2, 0)), (13, (2, 7)), (14, (3, 0))],
)
def test_TasArray_locate(index, expected):
    assert TasArray.locate(index) == expected


def test_TasArray_locate_invalid():

    with pytest.raises(ContractViolation):
        TasArray.locate(-1)


def test_TasArray_preset():

    array = TasArray(AtomicCounter().draw, preset_index=1)
    assert array.materialized == 2
    assert array[1].preset == True
    assert array[0].preset == False

    with pytest.raises(ContractViolation):
        TasArray(AtomicCounter().draw, preset_index=2)


def test_TasArray___getitem__():

    array = TasArray(AtomicCounter().draw)
    assert array.materialized == 0

    bit = array[6]
    assert array.materialized == 8
    assert array[6] is bit
    assert array[6].tas()[0] == 0
    assert array[6].tas()[0] == 1


# Test the SwapObject class
# ------------------------------------------------------------------------------------------
def test_SwapObject___init__():

    try:
        obj = SwapObject()

    except:
        assert False, "Unexpected exception raised on class construction"

    else:
        assert obj.init_value == 0
        assert obj.backend == Backend.ATOMIC
        assert obj.init_mode == InitMode.PRESET
        assert obj.max_round.read_max() == 0
        assert obj.bits[0].tas()[0] == 1


def test_swap_new():

    obj = swap_new(1)
    assert obj.max_round.read_max() == 1
    assert obj.bits[1].preset == True
    assert obj.bits[0].preset == False
    assert obj.probe() == 1


def test_swap_new_invalid():

    with pytest.raises(ContractViolation):
        swap_new(2)


@pytest.mark.parametrize("b", [0, 1])
def test_SwapObject___init___replay(b):

    obj = SwapObject(b, init=InitMode.REPLAY)
    assert obj.max_round.read_max() == b
    assert obj.bits[b].winner_ticket is not None
    assert obj.bits[b].preset == False
    assert obj.probe() == b


def test_SwapObject_swap_increment():

    obj = swap_new(0)
    returned, record = obj.swap(1)

    assert returned == 0
    assert type(record) == SwapRecord
    assert record.v == 1
    assert record.r == 1
    assert record.tas_result == 0
    assert record.base_ops == 3
    assert record.register_ops == 3
    assert record.incremented == True
    assert record.returned == 0


def test_SwapObject_swap_same_parity():

    obj = swap_new(0)
    returned, record = obj.swap(0)

    assert returned == 0
    assert record.r == 0
    assert record.tas_result == 1
    assert record.base_ops == 2
    assert record.incremented == False


def test_SwapObject_swap_sequence():

    obj = swap_new(0)
    results = [obj.swap(v, op_id=k) for k, v in enumerate([1, 1, 0, 0])]

    assert [returned for returned, _ in results] == [0, 1, 1, 0]
    assert [record.r for _, record in results] == [1, 1, 2, 2]
    assert [record.op_id for _, record in results] == [0, 1, 2, 3]
    assert obj.probe() == 0


def test_SwapObject_swap_invalid():

    obj = swap_new(0)

    with pytest.raises(ContractViolation):
        obj.swap(2)

    assert obj.max_round.read_max() == 0


def test_SwapObject_regtree():

    obj = SwapObject(0, backend=Backend.REGTREE, capacity=8)
    returned, record = obj.swap(1)

    assert returned == 0
    assert record.base_ops == 3
    assert record.register_ops == 7
    assert obj.swap(1)[0] == 1
    assert obj.swap(0)[0] == 1


def test_SwapObject_regtree_capacity():

    obj = SwapObject(0, backend=Backend.REGTREE, capacity=2)
    assert obj.swap(1)[0] == 0

    with pytest.raises(CapacityError):
        obj.swap(0)


def test_SwapObject_regtree_no_capacity():

    with pytest.raises(ContractViolation):
        SwapObject(0, backend=Backend.REGTREE)


@pytest.mark.parametrize(
    "backend, capacity, nswaps", [(Backend.ATOMIC, None, 100000), (Backend.REGTREE, 1 << 15, 20000)]
)
def test_SwapObject_sequential_oracle(backend, capacity, nswaps):

    rng = XorShift64Star(2024)
    inputs = [rng.bit() for _ in range(nswaps)]

    obj = SwapObject(1, backend=backend, capacity=capacity)
    outputs = []
    for v in inputs:
        returned, record = obj.swap(v)
        assert record.r % 2 == v
        assert record.base_ops in (2, 3)
        outputs.append(returned)

    assert outputs == seq_swap_oracle(1, inputs)
    assert obj.max_round.read_max() <= 1 + len(inputs)


def test_SwapObject_tickets():

    tickets = AtomicCounter(100)
    obj = SwapObject(0, tickets=tickets.draw)
    drawn = [obj.swap(v)[1].ticket for v in [1, 0, 1]]
    assert drawn == [100, 101, 102]


def test_SwapObject_concurrent():

    obj = swap_new(0)
    records = [[] for _ in range(4)]
    barrier = threading.Barrier(4)

    def worker(proc):
        barrier.wait()
        for op_id in range(500):
            records[proc].append(obj.swap((proc + op_id) % 2, proc, op_id)[1])

    threads = [threading.Thread(target=worker, args=(proc,)) for proc in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    merged = [record for proc_records in records for record in proc_records]
    assert all(record.r % 2 == record.v for record in merged)
    assert all(record.base_ops in (2, 3) for record in merged)

    # One winner per round above the initial value, none on the preset round
    winners = [record.r for record in merged if record.tas_result == 0]
    assert len(winners) == len(set(winners))
    assert 0 not in winners
    assert set(winners) == set(range(1, obj.max_round.read_max() + 1))


# Test the metrics function
# ------------------------------------------------------------------------------------------
def test_metrics_empty():

    obj = swap_new(1)
    result = metrics(obj, [])
    assert result.total_swaps == 0
    assert result.switch_count == 0
    assert result.max_round_final == 1


def test_metrics_single_switch():

    obj = swap_new(1)
    record = obj.swap(0)[1]
    result = metrics(obj, [record])
    assert result.total_swaps == 1
    assert result.switch_count == 1
    assert result.max_round_final == 2


def test_metrics_alternating():

    obj = swap_new(0)
    records = [obj.swap((k + 1) % 2)[1] for k in range(10)]
    result = metrics(obj, records)
    assert result.total_swaps == 10
    assert result.switch_count == 10
    assert result.max_round_final == 10


def test_metrics_no_change():

    obj = swap_new(0)
    records = [obj.swap(0)[1] for _ in range(5)]
    result = metrics(obj, records)
    assert result.switch_count == 0
    assert result.max_round_final == 0


# Test the TestAndSetResetBit class
# ------------------------------------------------------------------------------------------
def test_TestAndSetResetBit():

    bit = TestAndSetResetBit()

    assert bit.test_and_set() == 0
    assert bit.test_and_set() == 1
    assert bit.test_and_reset() == 1
    assert bit.test_and_reset() == 0
    assert bit.test_and_set() == 0


def test_TestAndSetResetBit_wrapped():

    bit = TestAndSetResetBit(swap_new(1))
    assert bit.test_and_reset() == 1
    assert bit.swap_object.probe() == 0
