import pytest

from dataclasses import replace

from bitswap.core.history import Event, EventKind, History
from bitswap.core.swap import SwapRecord
from bitswap.engines.model import ModelEngine, ProcessProgram
from bitswap.exceptions import ContractViolation, InstrumentationError, RefusalError
from bitswap.functions.linearizability import (
    GroupedLinearization,
    Verdict,
    brute_force_linearizable,
    explicit_linearize,
    seq_swap_oracle,
    verify_explicit,
)

INV, RES = EventKind.INVOKE, EventKind.RESPONSE


def sequential_history(b, inputs, outputs) -> History:
    events = []
    for op_id, (v, ret) in enumerate(zip(inputs, outputs)):
        events.append(Event(2 * op_id, 0, op_id, INV, v))
        events.append(Event(2 * op_id + 1, 0, op_id, RES, ret))
    return History(b, events)


def record(op_id, v, r, tas_result, ticket, returned, proc=0) -> SwapRecord:
    return SwapRecord(proc, op_id, v, r, tas_result, ticket, 3, 3, returned, True)


# Test the Verdict class
# ------------------------------------------------------------------------------------------
def test_Verdict():

    assert bool(Verdict.ok()) == True
    assert str(Verdict.ok()) == "pass"

    verdict = Verdict.fail(2, "wrong value")
    assert bool(verdict) == False
    assert verdict.clause == 2
    assert str(verdict) == "fail(clause 2): wrong value"
    assert str(Verdict.fail(None, "too many steps")) == "fail: too many steps"


# Test the seq_swap_oracle function
# ------------------------------------------------------------------------------------------
def test_seq_swap_oracle():

    assert seq_swap_oracle(0, []) == []
    assert seq_swap_oracle(0, [1, 1, 0, 0]) == [0, 1, 1, 0]
    assert seq_swap_oracle(1, [1]) == [1]


def test_seq_swap_oracle_state():

    inputs = [1, 0, 0, 1, 1, 0, 1]
    outputs = seq_swap_oracle(1, inputs)

    assert len(outputs) == len(inputs)
    assert outputs[1:] == inputs[:-1]


def test_seq_swap_oracle_invalid():

    with pytest.raises(ContractViolation):
        seq_swap_oracle(2, [1])

    with pytest.raises(ContractViolation):
        seq_swap_oracle(0, [1, 3])


# Test the brute_force_linearizable function
# ------------------------------------------------------------------------------------------
def test_brute_force_linearizable_empty():

    result = brute_force_linearizable(History())
    assert result.linearizable == True
    assert result.witness == []


def test_brute_force_linearizable_single():

    assert brute_force_linearizable(sequential_history(0, [1], [0]))
    assert not brute_force_linearizable(sequential_history(0, [1], [1]))


def test_brute_force_linearizable_concurrent():

    history = History(0, [Event(0, 0, 0, INV, 1), Event(1, 1, 0, INV, 1), Event(2, 0, 0, RES, 0), Event(3, 1, 0, RES, 1)])
    result = brute_force_linearizable(history)

    assert result.linearizable == True
    assert [span.key for span in result.witness] == [(0, 0), (1, 0)]
    assert result.explored > 0


def test_brute_force_linearizable_two_winners():

    history = History(0, [Event(0, 0, 0, INV, 1), Event(1, 1, 0, INV, 1), Event(2, 0, 0, RES, 1), Event(3, 1, 0, RES, 1)])
    result = brute_force_linearizable(history)

    assert result.linearizable == False
    assert result.witness == []


def test_brute_force_linearizable_real_time():

    # Linearizable only if the two sequential swaps could be reordered
    history = History(0, [Event(0, 0, 0, INV, 1), Event(1, 0, 0, RES, 1), Event(2, 1, 0, INV, 0), Event(3, 1, 0, RES, 0)])
    assert not brute_force_linearizable(history)


def test_brute_force_linearizable_pending():

    # The pending Swap(1) must take effect to explain the result 1
    history = History(0, [Event(0, 0, 0, INV, 1), Event(1, 1, 0, INV, 0), Event(2, 1, 0, RES, 1)])
    result = brute_force_linearizable(history)
    assert result.linearizable == True
    assert [span.key for span in result.witness] == [(0, 0), (1, 0)]

    # The pending Swap(1) never took effect
    history = History(0, [Event(0, 0, 0, INV, 1), Event(1, 1, 0, INV, 0), Event(2, 1, 0, RES, 0)])
    result = brute_force_linearizable(history)
    assert result.linearizable == True
    assert [span.key for span in result.witness] == [(1, 0)]


def test_brute_force_linearizable_witness():

    engine = ModelEngine()
    programs = [ProcessProgram.swaps([1, 0]), ProcessProgram.swaps([0, 1])]
    outcome = engine.run_random(programs, seed=5)

    result = brute_force_linearizable(outcome.history)
    assert result.linearizable == True

    replay = seq_swap_oracle(0, [span.argument for span in result.witness])
    assert replay == [span.result for span in result.witness]


def test_brute_force_linearizable_refusal():

    history = sequential_history(0, [1, 1, 1], [0, 1, 1])

    with pytest.raises(RefusalError) as error:
        brute_force_linearizable(history, max_ops=2)

    assert error.value.count == 3
    assert error.value.bound == 2


def test_brute_force_linearizable_single_flips():

    engine = ModelEngine()
    programs = [ProcessProgram.swaps([1, 1]), ProcessProgram.swaps([1, 0])]
    outcome = engine.run_random(programs, seed=1)
    assert brute_force_linearizable(outcome.history)

    # Flipping the first response of a sequential history always breaks it
    history = sequential_history(0, [1, 1, 0, 0], [0, 1, 1, 0])
    assert brute_force_linearizable(history)
    for index in range(4):
        outputs = [0, 1, 1, 0]
        outputs[index] = 1 - outputs[index]
        assert not brute_force_linearizable(sequential_history(0, [1, 1, 0, 0], outputs))


# Test the explicit_linearize function
# ------------------------------------------------------------------------------------------
def test_explicit_linearize_empty():

    grouping = explicit_linearize([], 0)
    assert type(grouping) == GroupedLinearization
    assert len(grouping) == 0
    assert grouping.groups == []


def test_explicit_linearize():

    late = record(1, 1, 1, 1, 9, 1)
    early = record(0, 1, 1, 0, 5, 0)
    grouping = explicit_linearize([late, early], 0)

    assert grouping.indices == [1]
    assert grouping.flatten() == [early, late]


def test_explicit_linearize_group_order():

    records = [record(0, 1, 3, 0, 7, 0), record(1, 0, 0, 1, 2, 0), record(2, 1, 1, 0, 4, 0)]
    grouping = explicit_linearize(records, 0)
    assert grouping.indices == [0, 1, 3]
    assert len(grouping) == 3


def test_explicit_linearize_duplicate():

    with pytest.raises(InstrumentationError):
        explicit_linearize([record(0, 1, 1, 0, 5, 0), record(1, 1, 1, 1, 5, 1)], 0)


# Test the verify_explicit function
# ------------------------------------------------------------------------------------------
def test_verify_explicit_sequential_run():

    engine = ModelEngine()
    programs = [ProcessProgram.swaps([1, 1, 0])]
    outcome = engine.run_schedule(programs, [0] * 8)

    grouping = explicit_linearize(outcome.records, 0)
    assert grouping.indices == [1, 2]
    assert [len(records) for _, records in grouping.groups] == [2, 1]
    assert verify_explicit(grouping, outcome.history, 0)


def test_verify_explicit_concurrent_runs():

    engine = ModelEngine()
    programs = [ProcessProgram.swaps([1, 0, 1]), ProcessProgram.swaps([0, 0, 1]), ProcessProgram.swaps([1, 1, 0])]

    for seed in range(25):
        outcome = engine.run_random(programs, seed, init_value=seed % 2)
        verdict = verify_explicit(explicit_linearize(outcome.records, seed % 2), outcome.history, seed % 2)
        assert verdict, f"seed {seed}: {verdict}"


def test_verify_explicit_empty():

    assert verify_explicit(GroupedLinearization(), History(), 0)


def test_verify_explicit_tampered_record():

    engine = ModelEngine()
    programs = [ProcessProgram.swaps([1, 0]), ProcessProgram.swaps([1])]
    outcome = engine.run_random(programs, seed=8)

    records = list(outcome.records)
    records[0] = replace(records[0], returned=1 - records[0].returned)

    verdict = verify_explicit(explicit_linearize(records, 0), outcome.history, 0)
    assert verdict.passed == False
    assert verdict.clause == 2


def test_verify_explicit_tampered_history():

    history = sequential_history(0, [1, 1], [0, 0])
    records = [record(0, 1, 1, 0, 1, 0), record(1, 1, 1, 1, 3, 1)]

    verdict = verify_explicit(explicit_linearize(records, 0), history, 0)
    assert verdict.clause == 2


def test_verify_explicit_real_time():

    history = sequential_history(0, [1, 1], [0, 1])
    records = [record(0, 1, 1, 1, 5, 0), record(1, 1, 1, 0, 0, 1)]

    verdict = verify_explicit(explicit_linearize(records, 0), history, 0)
    assert verdict.clause == 1


def test_verify_explicit_parity():

    history = sequential_history(0, [1], [0])
    verdict = verify_explicit(explicit_linearize([record(0, 1, 2, 0, 1, 0)], 0), history, 0)
    assert verdict.clause == 3


def test_verify_explicit_gap():

    history = sequential_history(0, [1, 1], [0, 1])
    records = [record(0, 1, 1, 0, 0, 0), record(1, 1, 3, 0, 1, 1)]

    verdict = verify_explicit(explicit_linearize(records, 0), history, 0)
    assert verdict.clause == 4


def test_verify_explicit_below_initial_round():

    history = sequential_history(1, [0], [1])
    verdict = verify_explicit(explicit_linearize([record(0, 0, 0, 0, 0, 1)], 1), history, 1)
    assert verdict.clause == 4


def test_verify_explicit_two_winners():

    history = sequential_history(0, [1, 1], [0, 1])
    records = [record(0, 1, 1, 0, 0, 0), record(1, 1, 1, 0, 1, 1)]

    verdict = verify_explicit(explicit_linearize(records, 0), history, 0)
    assert verdict.clause == 5


def test_verify_explicit_preset_winner():

    history = sequential_history(0, [0], [0])
    verdict = verify_explicit(explicit_linearize([record(0, 0, 0, 0, 0, 0)], 0), history, 0)
    assert verdict.clause == 5


def test_verify_explicit_mismatch():

    history = sequential_history(0, [1, 1], [0, 1])

    with pytest.raises(ContractViolation):
        verify_explicit(explicit_linearize([record(0, 1, 1, 0, 0, 0)], 0), history, 0)


def test_verify_explicit_incomplete():

    history = History(0, [Event(0, 0, 0, INV, 1)])

    with pytest.raises(ContractViolation):
        verify_explicit(GroupedLinearization(), history, 0)
