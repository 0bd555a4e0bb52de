"""Length-limited Huffman codes (package-merge) and DEFLATE tree headers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._tables import CL_ORDER, D_EXTRA, LL_EXTRA, NUM_D, NUM_LL

MAX_CODE_BITS = 15
MAX_CL_BITS = 7


class HuffmanError(ValueError):
    pass


@njit(cache=True)
def _sorted_leaves(freqs, leaves):
    """Used symbols ordered by (frequency, symbol); a single sort on a
    combined key keeps the order deterministic."""
    m = len(freqs) + 1
    key = np.empty(len(leaves), dtype=np.int64)
    for i in range(len(leaves)):
        key[i] = freqs[leaves[i]] * m + leaves[i]
    if len(key) <= 64:
        for i in range(1, len(key)):
            v = key[i]
            j = i - 1
            while j >= 0 and key[j] > v:
                key[j + 1] = key[j]
                j -= 1
            key[j + 1] = v
    else:
        key.sort()
    out = np.empty(len(leaves), dtype=np.int64)
    w = np.empty(len(leaves), dtype=np.int64)
    for i in range(len(leaves)):
        out[i] = key[i] % m
        w[i] = key[i] // m
    return out, w


@njit(cache=True)
def _package_merge(freqs, max_bits):
    """Optimal code lengths with no code longer than ``max_bits``.

    Returns an int64 array; -1 in slot 0 signals an impossible request.
    Zero-frequency symbols get length 0, a lone used symbol gets length 1.
    """
    n = len(freqs)
    lengths = np.zeros(n, dtype=np.int64)
    used = 0
    for i in range(n):
        if freqs[i] > 0:
            used += 1
    if used == 0:
        return lengths
    # leaves sorted by (frequency, symbol)
    leaves = np.empty(used, dtype=np.int64)
    k = 0
    for i in range(n):
        if freqs[i] > 0:
            leaves[k] = i
            k += 1
    leaves, w = _sorted_leaves(freqs, leaves)
    if used == 1:
        lengths[leaves[0]] = 1
        return lengths
    if used > (1 << max_bits):
        lengths[0] = -1
        return lengths
    # level lists: weights plus a flag per item (1 = leaf, 0 = package).
    # level 0 holds the leaves alone; every further level merges the leaves
    # with the pairwise packages of the previous level.
    cap = 2 * used
    lw = np.zeros((max_bits, cap), dtype=np.int64)
    isleaf = np.zeros((max_bits, cap), dtype=np.int8)
    size = np.zeros(max_bits, dtype=np.int64)
    for i in range(used):
        lw[0, i] = w[i]
        isleaf[0, i] = 1
    size[0] = used
    for lev in range(1, max_bits):
        npk = size[lev - 1] // 2
        a = 0  # leaves
        b = 0  # packages
        m = 0
        while a < used or b < npk:
            take_leaf = False
            if b >= npk:
                take_leaf = True
            elif a < used:
                pw = lw[lev - 1, 2 * b] + lw[lev - 1, 2 * b + 1]
                take_leaf = w[a] <= pw
            if take_leaf:
                lw[lev, m] = w[a]
                isleaf[lev, m] = 1
                a += 1
            else:
                lw[lev, m] = lw[lev - 1, 2 * b] + lw[lev - 1, 2 * b + 1]
                isleaf[lev, m] = 0
                b += 1
            m += 1
        size[lev] = m
    # select the first 2*used - 2 items of the last level and unpack
    take = 2 * used - 2
    lev = max_bits - 1
    while lev >= 0 and take > 0:
        nleaf = 0
        npack = 0
        for j in range(take):
            if isleaf[lev, j] == 1:
                nleaf += 1
            else:
                npack += 1
        # leaves appear in sorted order, so the first nleaf leaves were chosen
        for j in range(nleaf):
            lengths[leaves[j]] += 1
        take = 2 * npack
        lev -= 1
    return lengths


@njit(cache=True)
def _huffman_depths(freqs):
    """Unrestricted Huffman code lengths by the two-queue method; ties take
    the leaf first. Returns lengths (0 for unused symbols)."""
    n = len(freqs)
    lengths = np.zeros(n, dtype=np.int64)
    used = 0
    for i in range(n):
        if freqs[i] > 0:
            used += 1
    if used == 0:
        return lengths
    leaves = np.empty(used, dtype=np.int64)
    k = 0
    for i in range(n):
        if freqs[i] > 0:
            leaves[k] = i
            k += 1
    if used == 1:
        lengths[leaves[0]] = 1
        return lengths
    leaves, w = _sorted_leaves(freqs, leaves)
    total = 2 * used - 1
    weight = np.empty(total, dtype=np.int64)
    parent = np.empty(total, dtype=np.int64)
    weight[:used] = w
    a = 0  # next leaf
    b = used  # next internal node to consume
    for node in range(used, total):
        for side in range(2):
            if a < used and (b >= node or weight[a] <= weight[b]):
                pick = a
                a += 1
            else:
                pick = b
                b += 1
            parent[pick] = node
            if side == 0:
                weight[node] = weight[pick]
            else:
                weight[node] += weight[pick]
    depth = np.zeros(total, dtype=np.int64)
    for node in range(total - 2, -1, -1):
        depth[node] = depth[parent[node]] + 1
    for i in range(used):
        lengths[leaves[i]] = depth[i]
    return lengths


@njit(cache=True)
def _limited_lengths(freqs, max_bits):
    """Plain Huffman when it already fits in ``max_bits``, package-merge
    otherwise; both give minimum total length under the limit."""
    lengths = _huffman_depths(freqs)
    for ln in lengths:
        if ln > max_bits:
            return _package_merge(freqs, max_bits)
    return lengths


@njit(cache=True)
def _canonical_codes(lengths, max_bits):
    bl_count = np.zeros(max_bits + 1, dtype=np.int64)
    for ln in lengths:
        if ln > 0:
            bl_count[ln] += 1
    next_code = np.zeros(max_bits + 2, dtype=np.int64)
    code = 0
    for bits in range(1, max_bits + 1):
        code = (code + bl_count[bits - 1]) << 1
        next_code[bits] = code
    codes = np.zeros(len(lengths), dtype=np.int64)
    for s in range(len(lengths)):
        ln = lengths[s]
        if ln > 0:
            codes[s] = next_code[ln]
            next_code[ln] += 1
    return codes


@njit(cache=True)
def _reverse_bits(code, length):
    r = 0
    for _ in range(length):
        r = (r << 1) | (code & 1)
        code >>= 1
    return r


@njit(cache=True)
def _reversed_codes(lengths, max_bits):
    codes = _canonical_codes(lengths, max_bits)
    for s in range(len(codes)):
        codes[s] = _reverse_bits(codes[s], lengths[s])
    return codes


@dataclass(frozen=True)
class HuffmanCode:
    code_lengths: np.ndarray
    codes: np.ndarray

    @property
    def max_length(self) -> int:
        return int(self.code_lengths.max(initial=0))

    def kraft_sum(self) -> float:
        used = self.code_lengths[self.code_lengths > 0]
        return float(np.sum(np.ldexp(1.0, -used)))

    def codeword(self, symbol: int) -> str:
        n = int(self.code_lengths[symbol])
        return format(int(self.codes[symbol]), f"0{n}b") if n else ""


def build_length_limited_huffman(freqs, max_bits: int = MAX_CODE_BITS) -> HuffmanCode:
    """Optimal prefix code with every codeword at most ``max_bits`` long.

    Codes are canonical (RFC 1951 ordering). Raises HuffmanError when no
    frequency is positive or the alphabet cannot fit in ``max_bits``.
    """
    f = np.asarray(freqs, dtype=np.int64)
    if np.any(f < 0):
        raise HuffmanError("negative frequency")
    if not np.any(f > 0):
        raise HuffmanError("all frequencies are zero")
    lengths = _limited_lengths(f, max_bits)
    if lengths[0] < 0:
        raise HuffmanError(f"{int(np.count_nonzero(f))} symbols cannot fit in {max_bits}-bit codes")
    return HuffmanCode(lengths, _canonical_codes(lengths, max_bits))


@njit(cache=True)
def deflate_lengths(freqs, max_bits):
    """Code lengths as DEFLATE needs them: at least two coded symbols, so the
    code is always complete (a single used symbol is paired with a dummy)."""
    lengths = _limited_lengths(freqs, max_bits)
    used = 0
    for ln in lengths:
        if ln > 0:
            used += 1
    if used == 0:
        lengths[0] = 1
        lengths[1] = 1
    elif used == 1:
        for s in range(len(lengths)):
            if lengths[s] == 0:
                lengths[s] = 1
                break
    return lengths


@njit(cache=True)
def _rle_lengths(lld, use16, use17, use18, syms, extras):
    """Run-length encode the concatenated code lengths into code-length
    symbols; returns the number of symbols written into syms/extras."""
    n = len(lld)
    k = 0
    i = 0
    while i < n:
        symbol = lld[i]
        count = 1
        if use16 or (symbol == 0 and (use17 or use18)):
            j = i + 1
            while j < n and lld[j] == symbol:
                count += 1
                j += 1
        i += count
        if symbol == 0 and count >= 3:
            if use18:
                while count >= 11:
                    c = min(count, 138)
                    syms[k] = 18
                    extras[k] = c - 11
                    k += 1
                    count -= c
            if use17:
                while count >= 3:
                    c = min(count, 10)
                    syms[k] = 17
                    extras[k] = c - 3
                    k += 1
                    count -= c
        if use16 and count >= 4:
            count -= 1
            syms[k] = symbol
            extras[k] = 0
            k += 1
            while count >= 3:
                c = min(count, 6)
                syms[k] = 16
                extras[k] = c - 3
                k += 1
                count -= c
        while count > 0:
            syms[k] = symbol
            extras[k] = 0
            k += 1
            count -= 1
    return k


CL_EXTRA_BITS = np.array([0] * 16 + [2, 3, 7], dtype=np.int64)


@njit(cache=True)
def _header_plan(ll_lengths, d_lengths):
    """Pick the cheapest RLE variant for the tree description.

    Returns (bits, hlit, hdist, hclen, option) where bits counts everything
    after the 3-bit block header up to the first data symbol.
    """
    hlit = 286
    while hlit > 257 and ll_lengths[hlit - 1] == 0:
        hlit -= 1
    hdist = 30
    while hdist > 1 and d_lengths[hdist - 1] == 0:
        hdist -= 1
    lld = np.empty(hlit + hdist, dtype=np.int64)
    lld[:hlit] = ll_lengths[:hlit]
    lld[hlit:] = d_lengths[:hdist]
    syms = np.empty(len(lld), dtype=np.int64)
    extras = np.empty(len(lld), dtype=np.int64)
    best_bits = -1
    best_opt = 0
    best_hclen = 0
    for opt in range(8):
        k = _rle_lengths(lld, (opt & 1) != 0, (opt & 2) != 0, (opt & 4) != 0, syms, extras)
        cl_counts = np.zeros(19, dtype=np.int64)
        for j in range(k):
            cl_counts[syms[j]] += 1
        cl_len = deflate_lengths(cl_counts, MAX_CL_BITS)
        hclen = 19
        while hclen > 4 and cl_len[CL_ORDER[hclen - 1]] == 0:
            hclen -= 1
        bits = 14 + 3 * hclen
        for s in range(19):
            bits += cl_counts[s] * (cl_len[s] + CL_EXTRA_BITS[s])
        if best_bits < 0 or bits < best_bits:
            best_bits = bits
            best_opt = opt
            best_hclen = hclen
    return best_bits, hlit, hdist, best_hclen, best_opt


@njit(cache=True)
def dynamic_trees(ll_counts, d_counts):
    ll_len = deflate_lengths(ll_counts, MAX_CODE_BITS)
    d_len = deflate_lengths(d_counts, MAX_CODE_BITS)
    return ll_len, d_len


@njit(cache=True)
def data_bits(ll_counts, d_counts, ll_len, d_len):
    bits = 0
    for s in range(NUM_LL):
        bits += ll_counts[s] * (ll_len[s] + LL_EXTRA[s])
    for s in range(NUM_D):
        bits += d_counts[s] * (d_len[s] + D_EXTRA[s])
    return bits


@njit(cache=True)
def dynamic_block_bits(ll_counts, d_counts):
    """Exact size of a dynamic-Huffman block (header included) in bits."""
    ll_len, d_len = dynamic_trees(ll_counts, d_counts)
    header = _header_plan(ll_len, d_len)[0]
    return 3 + header + data_bits(ll_counts, d_counts, ll_len, d_len)


@njit(cache=True)
def tree_header_bits(ll_counts, d_counts):
    ll_len, d_len = dynamic_trees(ll_counts, d_counts)
    return _header_plan(ll_len, d_len)[0]
