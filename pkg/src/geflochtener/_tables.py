"""DEFLATE alphabets: length/distance symbol mapping, extra bits, fixed codes."""

import numpy as np
from numba import njit

MIN_MATCH = 3
MAX_MATCH = 258
WINDOW_SIZE = 32768

NUM_LL = 288
NUM_D = 32
END_OF_BLOCK = 256

LENGTH_BASE = np.array(
    [3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15, 17, 19, 23, 27, 31,
     35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258],
    dtype=np.int64,
)
LENGTH_EXTRA = np.array(
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2,
     3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0],
    dtype=np.int64,
)
DIST_BASE = np.array(
    [1, 2, 3, 4, 5, 7, 9, 13, 17, 25, 33, 49, 65, 97, 129, 193,
     257, 385, 513, 769, 1025, 1537, 2049, 3073, 4097, 6145,
     8193, 12289, 16385, 24577],
    dtype=np.int64,
)
DIST_EXTRA = np.array(
    [0, 0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6,
     7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13],
    dtype=np.int64,
)

# order in which code-length code lengths are transmitted
CL_ORDER = np.array(
    [16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15],
    dtype=np.int64,
)


def _build_length_tables():
    sym = np.zeros(MAX_MATCH + 1, dtype=np.int64)
    extra_bits = np.zeros(MAX_MATCH + 1, dtype=np.int64)
    extra_val = np.zeros(MAX_MATCH + 1, dtype=np.int64)
    for length in range(MIN_MATCH, MAX_MATCH + 1):
        # 258 has its own symbol even though 227 + 31 would reach it
        if length == MAX_MATCH:
            i = 28
        else:
            i = int(np.searchsorted(LENGTH_BASE[:28], length, side="right")) - 1
        sym[length] = 257 + i
        extra_bits[length] = LENGTH_EXTRA[i]
        extra_val[length] = length - LENGTH_BASE[i]
    return sym, extra_bits, extra_val


LENGTH_SYMBOL, LENGTH_EXTRA_BITS, LENGTH_EXTRA_VALUE = _build_length_tables()

# extra bits per literal/length symbol (0 for literals and end-of-block)
LL_EXTRA = np.zeros(NUM_LL, dtype=np.int64)
LL_EXTRA[257:286] = LENGTH_EXTRA
D_EXTRA = np.zeros(NUM_D, dtype=np.int64)
D_EXTRA[:30] = DIST_EXTRA

FIXED_LL_LENGTHS = np.zeros(NUM_LL, dtype=np.int64)
FIXED_LL_LENGTHS[0:144] = 8
FIXED_LL_LENGTHS[144:256] = 9
FIXED_LL_LENGTHS[256:280] = 7
FIXED_LL_LENGTHS[280:288] = 8
FIXED_D_LENGTHS = np.full(NUM_D, 5, dtype=np.int64)


@njit(cache=True)
def dist_symbol(dist):
    if dist <= 4:
        return dist - 1
    d = dist - 1
    nbits = 0
    while (d >> nbits) > 1:
        nbits += 1
    # nbits is floor(log2(dist - 1)), at least 2 here
    return 2 * nbits + ((d >> (nbits - 1)) & 1)


@njit(cache=True)
def dist_extra_bits(dist):
    if dist <= 4:
        return 0
    return dist_symbol(dist) // 2 - 1


def length_symbol(length: int) -> int:
    return int(LENGTH_SYMBOL[length])
