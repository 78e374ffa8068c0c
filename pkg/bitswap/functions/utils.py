import logging

from typing import List

from bitswap.config import InputPattern
from bitswap.engines.model import ProcessProgram
from bitswap.tools.prng import XorShift64Star

logger = logging.getLogger(__name__)


def pattern_inputs(pattern: InputPattern, proc: int, nops: int, seed: int = 0) -> List[int]:
    """
    Returns the input bits of one process for the selected pattern.

    Arguments
    ---------
    pattern: InputPattern
        The input pattern.
    proc: int
        The index of the process (odd processes shift alternating sequences by one position and
        use the alternating sequence in the mixed pattern).
    nops: int
        The number of swaps of the process.
    seed: int
        The seed of the random pattern. Each process draws from its own xorshift stream.
    """
    if pattern == InputPattern.ALL_ONES:
        return [1] * nops
    if pattern == InputPattern.ALL_ZEROS:
        return [0] * nops
    if pattern == InputPattern.ALTERNATING:
        return [(k + proc + 1) % 2 for k in range(nops)]
    if pattern == InputPattern.MIXED:
        if proc % 2 == 0:
            return [1] * nops
        return [(k + 1) % 2 for k in range(nops)]

    rng = XorShift64Star(seed).spawn(proc)
    return [rng.bit() for _ in range(nops)]


def build_programs(pattern: InputPattern, procs: int, nops: int, seed: int = 0) -> List[ProcessProgram]:
    """
    Builds the swap programs of `procs` processes running `nops` swaps each.
    """
    programs = [ProcessProgram.swaps(pattern_inputs(pattern, proc, nops, seed)) for proc in range(procs)]
    logger.debug(f"Programs ({pattern.value}): {[program.inputs for program in programs]}")
    return programs
