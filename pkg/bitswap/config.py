import os
import logging
from enum import Enum

logger = logging.getLogger(__name__)


def get_nthreads():
    try:
        nthreads = int(os.environ["BITSWAP_MAX_THREADS"])
        logger.debug("Environment variable BITSWAP_MAX_THREADS found")
    except (KeyError, ValueError):
        nthreads = len(os.sched_getaffinity(0))
        logger.debug("Environment variable BITSWAP_MAX_THREADS not found")

    logger.debug(f"Number of threads: {nthreads}")
    return nthreads


def _read_positive_int(name: str, default: int) -> int:
    raw = os.environ.get(name, str(default))
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"Invalid value for {name}: {raw}. A positive integer is required.")
    if value <= 0:
        raise ValueError(f"Invalid value for {name}: {raw}. A positive integer is required.")
    return value


# The version of the text history format written by `bitswap.core.history`
__HISTORY_VERSION__ = 1

# Largest worst-case number of base-object steps a program matrix may require
# before `enumerate_schedules` refuses to explore it
MAX_SCHEDULE_STEPS = _read_positive_int("BITSWAP_MAX_SCHEDULE_STEPS", 24)

# Largest number of completed operations accepted by the brute-force checker
MAX_BRUTE_FORCE_OPS = _read_positive_int("BITSWAP_MAX_BRUTE_FORCE_OPS", 12)

# Extra head-room added when the register-tree capacity is sized automatically
CAPACITY_MARGIN = _read_positive_int("BITSWAP_CAPACITY_MARGIN", 64)

# Exhaustive matrix limits enforced unless the user forces a larger run
EXHAUSTIVE_MAX_PROCS = 3
EXHAUSTIVE_MAX_OPS = 2


# Max register implementation used behind the `maxRound` handle
# "atomic"  : a single machine word raised with a compare-and-swap retry loop
# "regtree" : a bounded binary tree of one-bit read-write registers
class Backend(Enum):
    ATOMIC = "atomic"
    REGTREE = "regtree"


class Mode(Enum):
    EXHAUSTIVE = "exhaustive"
    STRESS = "stress"
    BENCH = "bench"
    CHECK = "check"


# Input sequences fed to every process of a run
# "alternating" : 1, 0, 1, 0, ... (shifted by one position on odd processes)
# "all-ones"    : 1, 1, 1, ...
# "all-zeros"   : 0, 0, 0, ...
# "mixed"       : even processes use all-ones, odd processes use alternating
# "random"      : seeded xorshift bits, one independent stream per process
class InputPattern(Enum):
    ALTERNATING = "alternating"
    ALL_ONES = "all-ones"
    ALL_ZEROS = "all-zeros"
    MIXED = "mixed"
    RANDOM = "random"


# How a swap object reaches its initial value b
# "PRESET" : maxRound set to b and t[b] preset to 1
# "REPLAY" : all-zero structure on which a real Swap(b) is run and discarded
class InitMode(Enum):
    PRESET = "preset"
    REPLAY = "replay"
