from __future__ import annotations

from bitswap.constants import XORSHIFT_MULTIPLIER, XORSHIFT_SEED_MIX, XORSHIFT_SHIFTS

_MASK = (1 << 64) - 1


class XorShift64Star:
    """
    The xorshift64* pseudo-random generator: a 64-bit xorshift state (shift triple 12, 25, 27)
    scrambled by a multiplication with 0x2545F4914F6CDD1D. The generator is tiny and fully
    specified by its constants, so that a seed reproduces the same stream in any language.

    Arguments
    ---------
    seed: int
        Any unsigned integer. The seed is mixed with a Weyl increment so that 0 is a valid seed.
    """

    def __init__(self, seed: int = 0) -> None:
        if seed < 0:
            raise ValueError(f"The seed must be an unsigned integer, got {seed}")
        self.seed = seed
        self.__state = ((seed + 1) * XORSHIFT_SEED_MIX) & _MASK or XORSHIFT_SEED_MIX

    def next_u64(self) -> int:
        a, b, c = XORSHIFT_SHIFTS
        x = self.__state
        x ^= x >> a
        x ^= (x << b) & _MASK
        x ^= x >> c
        self.__state = x
        return (x * XORSHIFT_MULTIPLIER) & _MASK

    def below(self, n: int) -> int:
        """
        Returns an integer in `[0, n)`. The modulo reduction has a bias of order `n / 2^64`,
        irrelevant for the small `n` of a scheduler.
        """
        if n <= 0:
            raise ValueError(f"The range must be positive, got {n}")
        return self.next_u64() % n

    def bit(self) -> int:
        return self.next_u64() >> 63

    def spawn(self, stream: int) -> XorShift64Star:
        """
        Returns an independent generator for the given stream index (e.g. one per process).
        """
        return XorShift64Star((self.seed * XORSHIFT_SEED_MIX + stream + 1) & _MASK)
