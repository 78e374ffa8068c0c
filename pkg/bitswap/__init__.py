from bitswap.config import Backend, InitMode, InputPattern, Mode
from bitswap.core.swap import SwapObject, SwapRecord, TestAndSetResetBit, swap_new

from bitswap.engines.model import ModelEngine, ProcessProgram
from bitswap.engines.threads import ThreadEngine
