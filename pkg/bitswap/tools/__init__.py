from bitswap.tools.prng import XorShift64Star
