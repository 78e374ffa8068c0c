## Machine word used by the atomic max register
WORD_BITS = 64
MAX_WORD = (1 << WORD_BITS) - 1

## Ticket of a preset test-and-set bit, smaller than any ticket drawn at runtime
PRESET_TICKET = -1

## Size of the first segment of the growable test-and-set array (segments double)
TAS_SEGMENT_BASE = 2
TAS_MAX_SEGMENTS = 64

## xorshift64* generator (Vigna 2016): shift triple and output multiplier
XORSHIFT_SHIFTS = (12, 25, 27)
XORSHIFT_MULTIPLIER = 0x2545F4914F6CDD1D
XORSHIFT_SEED_MIX = 0x9E3779B97F4A7C15  # Weyl increment used to spread seeds

## Exit codes of the command line interface
EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_REFUSAL = 3
EXIT_VERIFICATION_FAILURE = 4
EXIT_CAPACITY = 5
