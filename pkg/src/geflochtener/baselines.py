"""Textbook LZ77 and LZSS codecs with a fixed-width big-endian wire format.

These exist to put the DEFLATE results in context; they are not gzip
compatible. Wire formats:

    .lz77  b"LZ7\\x01" | count u32 | flags u8 (bit 0: last tuple has no
           symbol) | count x (offset u16, length u8, symbol u8)
    .lzss  b"LZS\\x01" | count u32 | groups of one flag byte (MSB = first
           item, 1 = pointer) followed by up to 8 items; a literal is one
           byte, a pointer is offset u16 + length u8

All integers are big-endian.
"""

from __future__ import annotations

import struct
from typing import NamedTuple

LZ77_MAGIC = b"LZ7\x01"
LZSS_MAGIC = b"LZS\x01"
DEFAULT_SEARCH = 4096
DEFAULT_LOOKAHEAD = 18
DEFAULT_MIN_MATCH = 2
MAX_OFFSET = 0xFFFF
MAX_LENGTH = 0xFF

POINTER_FLAG = 1
SYMBOL_FLAG = 0


class FormatError(ValueError):
    pass


class LZ77Tuple(NamedTuple):
    offset: int
    length: int
    symbol: int | None  # None only for a final match that ends the input


class LZSSItem(NamedTuple):
    flag: int
    offset: int = 0
    length: int = 0
    symbol: int = 0

    @classmethod
    def literal(cls, symbol: int) -> LZSSItem:
        return cls(SYMBOL_FLAG, symbol=symbol)

    @classmethod
    def pointer(cls, offset: int, length: int) -> LZSSItem:
        return cls(POINTER_FLAG, offset, length)


def _check_sizes(search_size: int, lookahead_size: int) -> None:
    if not 1 <= search_size <= MAX_OFFSET:
        raise ValueError(f"search_size must be in 1..{MAX_OFFSET}")
    if not 1 <= lookahead_size <= MAX_LENGTH:
        raise ValueError(f"lookahead_size must be in 1..{MAX_LENGTH}")


def _longest(data: bytes, pos: int, lo: int, hi_of, max_len: int) -> tuple[int, int]:
    """Longest prefix of data[pos:] found starting in [lo, pos); the most
    recent occurrence wins. hi_of(l) bounds the end of the occurrence."""
    best_len, best_off = 0, 0
    for ln in range(1, max_len + 1):
        i = data.rfind(data[pos:pos + ln], lo, hi_of(ln))
        if i < 0:
            break
        best_len, best_off = ln, pos - i
    return best_len, best_off


def lz77_encode(data: bytes, search_size: int = DEFAULT_SEARCH,
                lookahead_size: int = DEFAULT_LOOKAHEAD) -> list[LZ77Tuple]:
    """Classic LZ77: each step emits (offset, length, next symbol) and moves
    length + 1 ahead. Matches must lie inside the search buffer, so a run
    longer than the buffer is cut at its edge."""
    _check_sizes(search_size, lookahead_size)
    data = bytes(data)
    out = []
    pos, n = 0, len(data)
    while pos < n:
        ln, off = _longest(data, pos, max(0, pos - search_size), lambda _: pos,
                           min(lookahead_size, n - pos))
        nxt = data[pos + ln] if pos + ln < n else None
        out.append(LZ77Tuple(off, ln, nxt))
        pos += ln + 1
    return out


def lz77_decode(tuples) -> bytes:
    out = bytearray()
    for k, (off, ln, sym) in enumerate(tuples):
        if ln:
            if not 1 <= off <= len(out) or ln > off:
                raise FormatError(f"tuple {k} copies outside the decoded text")
            start = len(out) - off
            out += out[start:start + ln]
        if sym is None:
            if k != len(tuples) - 1:
                raise FormatError(f"tuple {k} lacks a symbol but is not last")
        else:
            out.append(sym)
    return bytes(out)


def lzss_encode(data: bytes, min_match: int = DEFAULT_MIN_MATCH, search_size: int = DEFAULT_SEARCH,
                lookahead_size: int = DEFAULT_LOOKAHEAD) -> list[LZSSItem]:
    """LZSS: a pointer only when the match is strictly longer than
    ``min_match``, a flagged literal otherwise. Copies may overlap the text
    being produced, so a short period can cover a long run."""
    if min_match < 1:
        raise ValueError("min_match must be at least 1")
    _check_sizes(search_size, lookahead_size)
    data = bytes(data)
    out = []
    pos, n = 0, len(data)
    while pos < n:
        ln, off = _longest(data, pos, max(0, pos - search_size), lambda l: pos - 1 + l,
                           min(lookahead_size, n - pos))
        if ln > min_match:
            out.append(LZSSItem.pointer(off, ln))
            pos += ln
        else:
            out.append(LZSSItem.literal(data[pos]))
            pos += 1
    return out


def lzss_decode(items) -> bytes:
    out = bytearray()
    for k, it in enumerate(items):
        if it.flag == SYMBOL_FLAG:
            out.append(it.symbol)
            continue
        if not 1 <= it.offset <= len(out) or it.length < 1:
            raise FormatError(f"item {k} points outside the decoded text")
        for _ in range(it.length):
            out.append(out[-it.offset])
    return bytes(out)


# ---------------------------------------------------------------- wire format

def serialize_lz77(tuples) -> bytes:
    tuples = list(tuples)
    if any(t.symbol is None for t in tuples[:-1]):
        raise ValueError("only the last tuple may omit its symbol")
    tail = 1 if tuples and tuples[-1].symbol is None else 0
    parts = [LZ77_MAGIC, struct.pack(">IB", len(tuples), tail)]
    parts += [struct.pack(">HBB", t.offset, t.length, 0 if t.symbol is None else t.symbol) for t in tuples]
    return b"".join(parts)


def deserialize_lz77(blob: bytes) -> list[LZ77Tuple]:
    if blob[:4] != LZ77_MAGIC:
        raise FormatError("not an .lz77 stream")
    if len(blob) < 9:
        raise FormatError("truncated .lz77 header")
    count, tail = struct.unpack_from(">IB", blob, 4)
    if len(blob) != 9 + 4 * count:
        raise FormatError(f".lz77 body holds {len(blob) - 9} bytes, expected {4 * count}")
    if tail > 1 or (tail and not count):
        raise FormatError("bad .lz77 flags")
    out = [LZ77Tuple(*t) for t in struct.iter_unpack(">HBB", blob[9:])]
    if tail:
        out[-1] = out[-1]._replace(symbol=None)
    return out


def serialize_lzss(items) -> bytes:
    items = list(items)
    parts = [LZSS_MAGIC, struct.pack(">I", len(items))]
    for g in range(0, len(items), 8):
        group = items[g:g + 8]
        flags = 0
        body = []
        for i, it in enumerate(group):
            if it.flag == POINTER_FLAG:
                flags |= 0x80 >> i
                body.append(struct.pack(">HB", it.offset, it.length))
            else:
                body.append(bytes([it.symbol]))
        parts.append(bytes([flags]))
        parts += body
    return b"".join(parts)


def deserialize_lzss(blob: bytes) -> list[LZSSItem]:
    if blob[:4] != LZSS_MAGIC:
        raise FormatError("not an .lzss stream")
    if len(blob) < 8:
        raise FormatError("truncated .lzss header")
    (count,) = struct.unpack_from(">I", blob, 4)
    pos = 8
    out = []
    try:
        while len(out) < count:
            flags = blob[pos]
            pos += 1
            for i in range(min(8, count - len(out))):
                if flags & (0x80 >> i):
                    off, ln = struct.unpack_from(">HB", blob, pos)
                    out.append(LZSSItem.pointer(off, ln))
                    pos += 3
                else:
                    out.append(LZSSItem.literal(blob[pos]))
                    pos += 1
    except (IndexError, struct.error) as e:
        raise FormatError("truncated .lzss body") from e
    if pos != len(blob):
        raise FormatError(f"{len(blob) - pos} trailing bytes in .lzss stream")
    return out


def serialize_tokens(tokens) -> bytes:
    """Serialize LZ77 tuples or LZSS items, chosen by element type."""
    tokens = list(tokens)
    if tokens and isinstance(tokens[0], LZSSItem):
        return serialize_lzss(tokens)
    return serialize_lz77(tokens)


def parse_tokens(blob: bytes):
    if blob[:4] == LZSS_MAGIC:
        return deserialize_lzss(blob)
    return deserialize_lz77(blob)


def lz77_compress(data: bytes, **kw) -> bytes:
    return serialize_lz77(lz77_encode(data, **kw))


def lz77_decompress(blob: bytes) -> bytes:
    return lz77_decode(deserialize_lz77(blob))


def lzss_compress(data: bytes, **kw) -> bytes:
    return serialize_lzss(lzss_encode(data, **kw))


def lzss_decompress(blob: bytes) -> bytes:
    return lzss_decode(deserialize_lzss(blob))
