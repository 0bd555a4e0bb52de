"""DEFLATE block encoder (RFC 1951) and gzip/zlib containers (RFC 1952/1950)."""

from __future__ import annotations

import enum
import struct
from typing import NamedTuple

import numpy as np
from numba import njit

from ._tables import (
    DIST_BASE,
    DIST_EXTRA,
    END_OF_BLOCK,
    FIXED_D_LENGTHS,
    FIXED_LL_LENGTHS,
    LENGTH_EXTRA_BITS,
    LENGTH_EXTRA_VALUE,
    LENGTH_SYMBOL,
    NUM_D,
    NUM_LL,
    dist_symbol,
)
from .huffman import (
    CL_EXTRA_BITS,
    CL_ORDER,
    MAX_CL_BITS,
    MAX_CODE_BITS,
    _header_plan,
    _reversed_codes,
    _rle_lengths,
    data_bits,
    deflate_lengths,
    dynamic_trees,
)
from .lz_store import TokenStore

STORED, FIXED, DYNAMIC = 0, 1, 2
BLOCK_TYPE_NAMES = {STORED: "stored", FIXED: "fixed", DYNAMIC: "dynamic"}
MAX_STORED = 65535


# ---------------------------------------------------------------- checksums

def _make_crc_table():
    table = np.zeros(256, dtype=np.uint32)
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ 0xEDB88320 if c & 1 else c >> 1
        table[i] = c
    return table


CRC_TABLE = _make_crc_table()


@njit(cache=True)
def _crc32(buf, crc, table):
    c = np.uint32(crc) ^ np.uint32(0xFFFFFFFF)
    for b in buf:
        c = table[(c ^ np.uint32(b)) & np.uint32(0xFF)] ^ (c >> np.uint32(8))
    return c ^ np.uint32(0xFFFFFFFF)


def crc32(data: bytes, crc: int = 0) -> int:
    """CRC-32 as used by gzip (reflected 0xEDB88320, pre/post inverted)."""
    return int(_crc32(np.frombuffer(data, dtype=np.uint8), crc, CRC_TABLE))


@njit(cache=True)
def _adler32(buf, value):
    a = value & 0xFFFF
    b = (value >> 16) & 0xFFFF
    i = 0
    n = len(buf)
    while i < n:
        # 5552 is the largest run that cannot overflow before the modulo
        end = min(n, i + 5552)
        while i < end:
            a += buf[i]
            b += a
            i += 1
        a %= 65521
        b %= 65521
    return (b << 16) | a


def adler32(data: bytes, value: int = 1) -> int:
    return int(_adler32(np.frombuffer(data, dtype=np.uint8), value))


# ---------------------------------------------------------------- bit output

@njit(cache=True)
def _put_bits(buf, bitpos, value, n):
    while n > 0:
        byte = bitpos >> 3
        off = bitpos & 7
        take = min(8 - off, n)
        buf[byte] |= np.uint8((value & ((1 << take) - 1)) << off)
        value >>= take
        n -= take
        bitpos += take
    return bitpos


@njit(cache=True)
def _write_tokens(buf, bitpos, litlens, dists, lo, hi, ll_codes, ll_lens, d_codes, d_lens):
    for i in range(lo, hi):
        d = dists[i]
        v = litlens[i]
        if d == 0:
            bitpos = _put_bits(buf, bitpos, ll_codes[v], ll_lens[v])
        else:
            s = LENGTH_SYMBOL[v]
            bitpos = _put_bits(buf, bitpos, ll_codes[s], ll_lens[s])
            bitpos = _put_bits(buf, bitpos, LENGTH_EXTRA_VALUE[v], LENGTH_EXTRA_BITS[v])
            ds = dist_symbol(d)
            bitpos = _put_bits(buf, bitpos, d_codes[ds], d_lens[ds])
            bitpos = _put_bits(buf, bitpos, d - DIST_BASE[ds], DIST_EXTRA[ds])
    bitpos = _put_bits(buf, bitpos, ll_codes[END_OF_BLOCK], ll_lens[END_OF_BLOCK])
    return bitpos


class BitWriter:
    """LSB-first bit packer; the final partial byte is zero padded."""

    def __init__(self, capacity: int = 1024):
        self.buf = np.zeros(max(16, capacity), dtype=np.uint8)
        self.bitpos = 0

    def reserve(self, nbits: int) -> None:
        need = (self.bitpos + nbits) // 8 + 8
        if need > len(self.buf):
            new = np.zeros(max(need, 2 * len(self.buf)), dtype=np.uint8)
            new[: len(self.buf)] = self.buf
            self.buf = new

    def write_bits(self, value: int, nbits: int) -> None:
        self.reserve(nbits)
        self.bitpos = int(_put_bits(self.buf, self.bitpos, value, nbits))

    def align(self) -> None:
        self.bitpos = (self.bitpos + 7) & ~7

    def write_bytes(self, data: bytes) -> None:
        if self.bitpos & 7:
            raise ValueError("write_bytes needs byte alignment")
        self.reserve(8 * len(data))
        start = self.bitpos >> 3
        self.buf[start:start + len(data)] = np.frombuffer(data, dtype=np.uint8)
        self.bitpos += 8 * len(data)

    def getvalue(self) -> bytes:
        return self.buf[: (self.bitpos + 7) >> 3].tobytes()


# ---------------------------------------------------------------- block sizing

@njit(cache=True)
def histogram(litlens, dists, lo, hi):
    ll = np.zeros(NUM_LL, dtype=np.int64)
    dd = np.zeros(NUM_D, dtype=np.int64)
    for i in range(lo, hi):
        d = dists[i]
        if d == 0:
            ll[litlens[i]] += 1
        else:
            ll[LENGTH_SYMBOL[litlens[i]]] += 1
            dd[dist_symbol(d)] += 1
    ll[END_OF_BLOCK] += 1
    return ll, dd


def stored_block_bits(nbytes: int, bitpos: int = 0) -> int:
    """Bits for ``nbytes`` of stored blocks starting at stream bit ``bitpos``."""
    chunks = max(1, -(-nbytes // MAX_STORED))
    total = 0
    pos = bitpos
    for _ in range(chunks):
        pad = (8 - (pos + 3) % 8) % 8
        total += 3 + pad + 32
        pos += 3 + pad + 32
    return total + 8 * nbytes


@njit(cache=True)
def _fixed_bits(ll_counts, d_counts):
    return 3 + data_bits(ll_counts, d_counts, FIXED_LL_LENGTHS, FIXED_D_LENGTHS)


@njit(cache=True)
def _dynamic_bits(ll_counts, d_counts):
    ll_len, d_len = dynamic_trees(ll_counts, d_counts)
    return 3 + _header_plan(ll_len, d_len)[0] + data_bits(ll_counts, d_counts, ll_len, d_len)


class BlockCost(NamedTuple):
    stored: int
    fixed: int
    dynamic: int

    @property
    def best_type(self) -> int:
        # ties resolve towards the simpler block type
        costs = (self.stored, self.fixed, self.dynamic)
        return min(range(3), key=lambda t: (costs[t], t))

    @property
    def best(self) -> int:
        return min(self.stored, self.fixed, self.dynamic)


def _byte_span(store: TokenStore, lo: int, hi: int) -> tuple[int, int]:
    n = len(store)
    start = int(store.positions[lo]) if lo < n else store.end
    end = int(store.positions[hi]) if hi < n else store.end
    return start, end


def block_cost(store: TokenStore, lo: int, hi: int, bitpos: int = 0) -> BlockCost:
    """Exact bit counts of tokens ``lo:hi`` under all three block types."""
    ll, dd = histogram(store.litlens, store.dists, lo, hi)
    start, end = _byte_span(store, lo, hi)
    return BlockCost(
        stored_block_bits(end - start, bitpos),
        int(_fixed_bits(ll, dd)),
        int(_dynamic_bits(ll, dd)),
    )


def encoded_bits(store: TokenStore, lo: int = 0, hi: int | None = None) -> int:
    """Size of tokens ``lo:hi`` as one best-type block at a byte boundary."""
    hi = len(store) if hi is None else hi
    return block_cost(store, lo, hi, 0).best


# ---------------------------------------------------------------- emission

def _write_huffman_block(writer: BitWriter, store: TokenStore, lo: int, hi: int,
                         ll_len, d_len, nbits: int) -> None:
    ll_codes = _reversed_codes(ll_len, MAX_CODE_BITS)
    d_codes = _reversed_codes(d_len, MAX_CODE_BITS)
    writer.reserve(nbits)
    writer.bitpos = int(_write_tokens(
        writer.buf, writer.bitpos, store.litlens, store.dists, lo, hi,
        ll_codes, ll_len, d_codes, d_len,
    ))


def _write_tree_header(writer: BitWriter, ll_len, d_len) -> None:
    _, hlit, hdist, hclen, opt = _header_plan(ll_len, d_len)
    lld = np.concatenate([ll_len[:hlit], d_len[:hdist]]).astype(np.int64)
    syms = np.empty(len(lld), dtype=np.int64)
    extras = np.empty(len(lld), dtype=np.int64)
    k = _rle_lengths(lld, bool(opt & 1), bool(opt & 2), bool(opt & 4), syms, extras)
    cl_counts = np.bincount(syms[:k], minlength=19).astype(np.int64)
    cl_len = deflate_lengths(cl_counts, MAX_CL_BITS)
    cl_codes = _reversed_codes(cl_len, MAX_CL_BITS)
    writer.write_bits(hlit - 257, 5)
    writer.write_bits(hdist - 1, 5)
    writer.write_bits(hclen - 4, 4)
    for i in range(hclen):
        writer.write_bits(int(cl_len[CL_ORDER[i]]), 3)
    for j in range(k):
        s = int(syms[j])
        writer.write_bits(int(cl_codes[s]), int(cl_len[s]))
        if CL_EXTRA_BITS[s]:
            writer.write_bits(int(extras[j]), int(CL_EXTRA_BITS[s]))


def emit_block(store: TokenStore, lo: int, hi: int, is_final: bool, writer: BitWriter,
               data: bytes | np.ndarray, block_type: int | None = None) -> int:
    """Write tokens ``lo:hi`` as one DEFLATE block and return the bits written.

    The cheapest of stored, fixed and dynamic encoding is chosen unless
    ``block_type`` forces one. ``data`` is the input the store was parsed
    from (needed for stored blocks).
    """
    start_bits = writer.bitpos
    cost = block_cost(store, lo, hi, writer.bitpos)
    btype = cost.best_type if block_type is None else block_type
    final = 1 if is_final else 0
    if btype == STORED:
        start, end = _byte_span(store, lo, hi)
        raw = bytes(memoryview(data)[start:end]) if not isinstance(data, np.ndarray) else data[start:end].tobytes()
        chunks = [raw[i:i + MAX_STORED] for i in range(0, len(raw), MAX_STORED)] or [b""]
        for ci, chunk in enumerate(chunks):
            writer.write_bits(final if ci == len(chunks) - 1 else 0, 1)
            writer.write_bits(STORED, 2)
            writer.align()
            writer.write_bits(len(chunk), 16)
            writer.write_bits(len(chunk) ^ 0xFFFF, 16)
            writer.write_bytes(chunk)
    else:
        writer.write_bits(final, 1)
        writer.write_bits(btype, 2)
        if btype == FIXED:
            ll_len, d_len = FIXED_LL_LENGTHS, FIXED_D_LENGTHS
        else:
            ll, dd = histogram(store.litlens, store.dists, lo, hi)
            ll_len, d_len = dynamic_trees(ll, dd)
            _write_tree_header(writer, ll_len, d_len)
        _write_huffman_block(writer, store, lo, hi, ll_len, d_len, cost[btype])
    written = writer.bitpos - start_bits
    if written != cost[btype]:
        raise AssertionError(f"block size mismatch: wrote {written} bits, expected {cost[btype]}")
    return written


def encode_deflate(store: TokenStore, data, splits=()) -> tuple[bytes, list[int]]:
    """Raw DEFLATE stream for ``store`` with block boundaries at token indices
    ``splits``. Returns the payload and the type chosen for each block."""
    bounds = [0, *splits, len(store)]
    writer = BitWriter(len(store) + 64)
    types = []
    for b in range(len(bounds) - 1):
        lo, hi = bounds[b], bounds[b + 1]
        cost = block_cost(store, lo, hi, writer.bitpos)
        types.append(cost.best_type)
        emit_block(store, lo, hi, b == len(bounds) - 2, writer, data)
    return writer.getvalue(), types


def plan_bits(store: TokenStore, splits=()) -> int:
    """Total stream bits :func:`encode_deflate` would produce."""
    bounds = [0, *splits, len(store)]
    pos = 0
    for b in range(len(bounds) - 1):
        pos += block_cost(store, bounds[b], bounds[b + 1], pos).best
    return pos


# ---------------------------------------------------------------- containers

class ContainerFormat(enum.Enum):
    RAW = "raw"
    ZLIB = "zlib"
    GZIP = "gzip"

    @property
    def checksum(self) -> str:
        return {"raw": "none", "zlib": "adler32", "gzip": "crc32"}[self.value]


GZIP_HEADER = bytes([0x1F, 0x8B, 0x08, 0x00, 0, 0, 0, 0, 0x02, 0xFF])
ZLIB_HEADER = bytes([0x78, 0xDA])


def wrap_container(deflate_bytes: bytes, fmt: ContainerFormat | str, original: bytes) -> bytes:
    """Frame a raw DEFLATE payload. Headers are fixed (MTIME 0, OS 255), so
    identical inputs give identical files."""
    fmt = ContainerFormat(fmt)
    if fmt is ContainerFormat.RAW:
        return bytes(deflate_bytes)
    if fmt is ContainerFormat.ZLIB:
        return ZLIB_HEADER + deflate_bytes + struct.pack(">I", adler32(original))
    trailer = struct.pack("<II", crc32(original), len(original) & 0xFFFFFFFF)
    return GZIP_HEADER + deflate_bytes + trailer
