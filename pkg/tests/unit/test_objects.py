import pytest
import threading

from bitswap.config import Backend
from bitswap.constants import MAX_WORD, PRESET_TICKET
from bitswap.core.atomics import AtomicCounter
from bitswap.core.maxreg_tree import TreeMaxRegister
from bitswap.core.objects import (
    AtomicMaxRegister,
    RegisterCell,
    StepCounter,
    TasBit,
    new_max_register,
    preset_tas_bit,
)
from bitswap.exceptions import CapacityError, ContractViolation
from bitswap.tools.prng import XorShift64Star


# Test the RegisterCell class
# ------------------------------------------------------------------------------------------
def test_RegisterCell___init__():

    try:
        cell = RegisterCell()

    except:
        assert False, "Unexpected exception raised on class construction"

    else:
        assert cell.width == 64
        assert cell.read() == 0


def test_RegisterCell___init___invalid():

    with pytest.raises(ContractViolation):
        RegisterCell(width=0)

    with pytest.raises(ContractViolation):
        RegisterCell(width=2, value=4)


def test_RegisterCell_write():

    cell = RegisterCell()
    cell.write(0)
    assert cell.read() == 0

    cell.write(7)
    assert cell.read() == 7

    cell.write(3)
    cell.write(1)
    assert cell.read() == 1


def test_RegisterCell_write_too_wide():

    cell = RegisterCell(width=3)
    cell.write(7)

    with pytest.raises(ContractViolation):
        cell.write(8)

    assert cell.read() == 7


def test_RegisterCell_step_count():

    cell = RegisterCell()
    counter = StepCounter()

    cell.write(5, counter)
    cell.read(counter)
    cell.read(counter)

    assert counter.count == 3


def test_RegisterCell_concurrent_writes():

    cell = RegisterCell()
    threads = [threading.Thread(target=cell.write, args=(value,)) for value in (2, 9)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert cell.read() in (2, 9)


# Test the TasBit class
# ------------------------------------------------------------------------------------------
def test_TasBit_tas():

    bit = TasBit(AtomicCounter().draw)
    assert bit.winner_ticket is None

    first, ticket = bit.tas()
    assert first == 0
    assert bit.winner_ticket == ticket

    second, later = bit.tas()
    assert second == 1
    assert later > ticket
    assert bit.winner_ticket == ticket


def test_TasBit_step_count():

    bit = TasBit(AtomicCounter().draw)
    counter = StepCounter()
    bit.tas(counter)
    bit.tas(counter)
    assert counter.count == 2


def test_preset_tas_bit():

    tickets = AtomicCounter()
    bit = preset_tas_bit(tickets.draw)

    assert bit.preset == True
    assert bit.winner_ticket == PRESET_TICKET

    results = [bit.tas() for _ in range(5)]
    assert [value for value, _ in results] == [1] * 5
    assert all(ticket > bit.winner_ticket for _, ticket in results)


def test_TasBit_concurrent():

    tickets = AtomicCounter()
    bit = TasBit(tickets.draw)
    results = [None] * 8
    barrier = threading.Barrier(8)

    def worker(index):
        barrier.wait()
        results[index] = bit.tas()

    threads = [threading.Thread(target=worker, args=(index,)) for index in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert [value for value, _ in results].count(0) == 1
    assert len({ticket for _, ticket in results}) == 8

    # The winner holds the smallest ticket
    winner = [ticket for value, ticket in results if value == 0][0]
    assert winner == min(ticket for _, ticket in results)


# Test the AtomicMaxRegister class
# ------------------------------------------------------------------------------------------
def test_AtomicMaxRegister___init__():

    try:
        register = AtomicMaxRegister()

    except:
        assert False, "Unexpected exception raised on class construction"

    else:
        assert register.read_max() == 0
        assert register.capacity is None
        assert register.max_steps() == 1
        assert register.backend == Backend.ATOMIC


def test_AtomicMaxRegister_write_max():

    register = AtomicMaxRegister()
    register.write_max(0)
    assert register.read_max() == 0

    register.write_max(4)
    register.write_max(2)
    assert register.read_max() == 4


def test_AtomicMaxRegister_initial():

    register = AtomicMaxRegister(1)
    register.write_max(0)
    assert register.read_max() == 1


def test_AtomicMaxRegister_invalid_value():

    register = AtomicMaxRegister()

    with pytest.raises(ContractViolation):
        register.write_max(-1)

    with pytest.raises(ContractViolation):
        register.write_max(MAX_WORD + 1)


def test_AtomicMaxRegister_step_count():

    register = AtomicMaxRegister()
    counter = StepCounter()
    register.write_max(3, counter)
    register.write_max(1, counter)
    register.read_max(counter)
    assert counter.count == 3


def test_AtomicMaxRegister_concurrent():

    register = AtomicMaxRegister()

    def worker(offset):
        for value in range(offset, 2000, 4):
            register.write_max(value)

    threads = [threading.Thread(target=worker, args=(offset,)) for offset in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert register.read_max() == 1999


def test_AtomicMaxRegister_quiescent_workload():

    rng = XorShift64Star(7)
    register = AtomicMaxRegister()
    expected = 0

    for _ in range(100000):
        if rng.bit():
            value = rng.below(1 << 32)
            register.write_max(value)
            expected = max(expected, value)
        else:
            assert register.read_max() == expected


# Test the new_max_register function
# ------------------------------------------------------------------------------------------
def test_new_max_register_atomic():

    register = new_max_register(Backend.ATOMIC, initial=1)
    assert type(register) == AtomicMaxRegister
    assert register.read_max() == 1


def test_new_max_register_regtree():

    register = new_max_register(Backend.REGTREE, capacity=8, initial=5)
    assert type(register) == TreeMaxRegister
    assert register.capacity == 8
    assert register.read_max() == 5

    with pytest.raises(CapacityError):
        register.write_max(8)


def test_new_max_register_regtree_no_capacity():

    with pytest.raises(ContractViolation):
        new_max_register(Backend.REGTREE)
