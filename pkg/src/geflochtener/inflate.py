"""Strict RFC 1951/1950/1952 decoder.

Every malformed construct maps to its own exception class so that tests can
tell an encoder bug apart from a truncated file. Incomplete Huffman codes are
rejected except for the one case DEFLATE encoders legitimately produce: a
literal/length or distance code with a single one-bit codeword (or, for
distances, no codes at all).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._tables import CL_ORDER, DIST_BASE, DIST_EXTRA, LENGTH_BASE, LENGTH_EXTRA
from .entropy_coder import ContainerFormat, adler32, crc32


class InflateError(ValueError):
    """Base class for every decoding diagnostic."""


class TruncatedInput(InflateError):
    pass


class InvalidBlockType(InflateError):
    pass


class StoredLengthMismatch(InflateError):
    pass


class OversubscribedTree(InflateError):
    pass


class IncompleteTree(InflateError):
    pass


class InvalidSymbol(InflateError):
    pass


class DistanceTooFar(InflateError):
    pass


class InvalidCodeLengths(InflateError):
    pass


class BadMagic(InflateError):
    pass


class HeaderCheckFailed(InflateError):
    pass


class UnsupportedFeature(InflateError):
    pass


class ChecksumMismatch(InflateError):
    pass


class LengthMismatch(InflateError):
    pass


class TrailingData(InflateError):
    pass


# kernel error codes
_OK = 0
_TRUNCATED = 1
_BAD_BTYPE = 2
_STORED_LEN = 3
_OVERSUB = 4
_INCOMPLETE = 5
_BAD_SYMBOL = 6
_TOO_FAR = 7
_BAD_COUNTS = 8
_REPEAT_NO_PREV = 9
_REPEAT_OVERFLOW = 10
_NO_EOB = 11

_ERRORS = {
    _TRUNCATED: (TruncatedInput, "input ends inside the deflate stream"),
    _BAD_BTYPE: (InvalidBlockType, "reserved block type 3"),
    _STORED_LEN: (StoredLengthMismatch, "stored block LEN does not match NLEN"),
    _OVERSUB: (OversubscribedTree, "oversubscribed Huffman code"),
    _INCOMPLETE: (IncompleteTree, "incomplete Huffman code"),
    _BAD_SYMBOL: (InvalidSymbol, "invalid or undecodable symbol"),
    _TOO_FAR: (DistanceTooFar, "distance reaches before the start of the output"),
    _BAD_COUNTS: (InvalidCodeLengths, "too many literal/length or distance codes"),
    _REPEAT_NO_PREV: (InvalidCodeLengths, "repeat code with no previous length"),
    _REPEAT_OVERFLOW: (InvalidCodeLengths, "code length repeat runs past the end"),
    _NO_EOB: (InvalidCodeLengths, "end-of-block symbol has no code"),
}

_LBASE = np.array(LENGTH_BASE, dtype=np.int64)
_LEXT = np.array(LENGTH_EXTRA, dtype=np.int64)
_DBASE = np.array(DIST_BASE, dtype=np.int64)
_DEXT = np.array(DIST_EXTRA, dtype=np.int64)
_CL_ORDER = np.array(CL_ORDER, dtype=np.int64)


# st holds the reader state: [byte position, bit buffer, bits in buffer, error]

@njit(cache=True)
def _bits(src, st, need):
    val = st[1]
    cnt = st[2]
    while cnt < need:
        if st[0] >= len(src):
            st[3] = _TRUNCATED
            return 0
        val |= np.int64(src[st[0]]) << cnt
        st[0] += 1
        cnt += 8
    st[1] = val >> need
    st[2] = cnt - need
    return val & ((np.int64(1) << need) - 1)


@njit(cache=True)
def _construct(lengths, n, count, symbol):
    """Canonical decoding tables; returns the number of unused codewords at
    the deepest level (negative when oversubscribed)."""
    count[:] = 0
    for s in range(n):
        count[lengths[s]] += 1
    if count[0] == n:
        return 0
    left = 1
    for ln in range(1, 16):
        left <<= 1
        left -= count[ln]
        if left < 0:
            return left
    offs = np.zeros(16, dtype=np.int64)
    for ln in range(1, 15):
        offs[ln + 1] = offs[ln] + count[ln]
    for s in range(n):
        if lengths[s] != 0:
            symbol[offs[lengths[s]]] = s
            offs[lengths[s]] += 1
    return left


@njit(cache=True)
def _decode(src, st, count, symbol):
    code = 0
    first = 0
    index = 0
    for ln in range(1, 16):
        code |= _bits(src, st, 1)
        if st[3] != 0:
            return -1
        c = count[ln]
        if code - c < first:
            return symbol[index + code - first]
        index += c
        first += c
        first <<= 1
        code <<= 1
    st[3] = _BAD_SYMBOL
    return -1


@njit(cache=True)
def _reserve(out, n, extra):
    if n + extra <= len(out):
        return out
    grown = np.empty(max(2 * len(out), n + extra), dtype=np.uint8)
    grown[:n] = out[:n]
    return grown


@njit(cache=True)
def _tree_error(left, n, count):
    if left < 0:
        return _OVERSUB
    if left > 0 and n != count[0] + count[1]:
        return _INCOMPLETE
    return _OK


@njit(cache=True)
def _inflate(src, start):
    """Returns (output, end position, error code)."""
    st = np.zeros(4, dtype=np.int64)
    st[0] = start
    out = np.empty(max(1024, 4 * len(src)), dtype=np.uint8)
    n = 0
    lcount = np.zeros(16, dtype=np.int64)
    lsym = np.zeros(288, dtype=np.int64)
    dcount = np.zeros(16, dtype=np.int64)
    dsym = np.zeros(32, dtype=np.int64)
    ccount = np.zeros(16, dtype=np.int64)
    csym = np.zeros(19, dtype=np.int64)
    lengths = np.zeros(320, dtype=np.int64)
    last = 0
    while last == 0:
        last = _bits(src, st, 1)
        btype = _bits(src, st, 2)
        if st[3] != 0:
            return out[:n], st[0], st[3]
        if btype == 0:
            st[1] = 0
            st[2] = 0
            p = st[0]
            if p + 4 > len(src):
                return out[:n], p, _TRUNCATED
            ln = np.int64(src[p]) | (np.int64(src[p + 1]) << 8)
            nl = np.int64(src[p + 2]) | (np.int64(src[p + 3]) << 8)
            if ln != (~nl & 0xFFFF):
                return out[:n], p, _STORED_LEN
            p += 4
            if p + ln > len(src):
                return out[:n], len(src), _TRUNCATED
            out = _reserve(out, n, ln)
            out[n:n + ln] = src[p:p + ln]
            n += ln
            st[0] = p + ln
            continue
        if btype == 1:
            for s in range(144):
                lengths[s] = 8
            for s in range(144, 256):
                lengths[s] = 9
            for s in range(256, 280):
                lengths[s] = 7
            for s in range(280, 288):
                lengths[s] = 8
            _construct(lengths, 288, lcount, lsym)
            # distance codes 30 and 31 exist in the fixed code but are invalid
            for s in range(32):
                lengths[s] = 5
            _construct(lengths, 32, dcount, dsym)
        elif btype == 2:
            nlen = _bits(src, st, 5) + 257
            ndist = _bits(src, st, 5) + 1
            ncode = _bits(src, st, 4) + 4
            if st[3] != 0:
                return out[:n], st[0], st[3]
            if nlen > 286 or ndist > 30:
                return out[:n], st[0], _BAD_COUNTS
            lengths[:19] = 0
            for i in range(ncode):
                lengths[_CL_ORDER[i]] = _bits(src, st, 3)
            if st[3] != 0:
                return out[:n], st[0], st[3]
            left = _construct(lengths, 19, ccount, csym)
            if left < 0:
                return out[:n], st[0], _OVERSUB
            if left > 0:
                return out[:n], st[0], _INCOMPLETE
            index = 0
            total = nlen + ndist
            while index < total:
                sym = _decode(src, st, ccount, csym)
                if sym < 0:
                    return out[:n], st[0], st[3]
                if sym < 16:
                    lengths[index] = sym
                    index += 1
                    continue
                fill = 0
                if sym == 16:
                    if index == 0:
                        return out[:n], st[0], _REPEAT_NO_PREV
                    fill = lengths[index - 1]
                    rep = 3 + _bits(src, st, 2)
                elif sym == 17:
                    rep = 3 + _bits(src, st, 3)
                else:
                    rep = 11 + _bits(src, st, 7)
                if st[3] != 0:
                    return out[:n], st[0], st[3]
                if index + rep > total:
                    return out[:n], st[0], _REPEAT_OVERFLOW
                for _ in range(rep):
                    lengths[index] = fill
                    index += 1
            if lengths[256] == 0:
                return out[:n], st[0], _NO_EOB
            err = _tree_error(_construct(lengths, nlen, lcount, lsym), nlen, lcount)
            if err != _OK:
                return out[:n], st[0], err
            err = _tree_error(_construct(lengths[nlen:], ndist, dcount, dsym), ndist, dcount)
            if err != _OK:
                return out[:n], st[0], err
        else:
            return out[:n], st[0], _BAD_BTYPE
        # Huffman-coded data
        while True:
            sym = _decode(src, st, lcount, lsym)
            if sym < 0:
                return out[:n], st[0], st[3]
            if sym < 256:
                out = _reserve(out, n, 1)
                out[n] = sym
                n += 1
                continue
            if sym == 256:
                break
            sym -= 257
            if sym >= 29:
                return out[:n], st[0], _BAD_SYMBOL
            ln = _LBASE[sym] + _bits(src, st, _LEXT[sym])
            ds = _decode(src, st, dcount, dsym)
            if ds < 0:
                return out[:n], st[0], st[3]
            if ds >= 30:
                return out[:n], st[0], _BAD_SYMBOL
            d = _DBASE[ds] + _bits(src, st, _DEXT[ds])
            if st[3] != 0:
                return out[:n], st[0], st[3]
            if d > n:
                return out[:n], st[0], _TOO_FAR
            out = _reserve(out, n, ln)
            for k in range(ln):
                out[n + k] = out[n + k - d]
            n += ln
    return out[:n], st[0], _OK


@dataclass(frozen=True)
class InflateResult:
    output: bytes
    consumed: int  # input bytes used, trailer included
    checksum_verified: bool


def _as_array(data) -> np.ndarray:
    return np.frombuffer(bytes(data), dtype=np.uint8)


def _raw(src: np.ndarray, start: int) -> tuple[bytes, int]:
    out, end, err = _inflate(src, start)
    if err != _OK:
        cls, msg = _ERRORS[int(err)]
        raise cls(f"{msg} (near input byte {int(end)})")
    return out.tobytes(), int(end)


def inflate_result(data: bytes) -> InflateResult:
    out, end = _raw(_as_array(data), 0)
    return InflateResult(out, end, False)


def inflate(data: bytes) -> bytes:
    """Decode a raw DEFLATE stream. Bytes after the final block are ignored."""
    return inflate_result(data).output


def _need(src, pos, k, what):
    if pos + k > len(src):
        raise TruncatedInput(f"input ends inside the {what}")


def gunzip_result(data: bytes) -> InflateResult:
    src = _as_array(data)
    _need(src, 0, 10, "gzip header")
    if src[0] != 0x1F or src[1] != 0x8B:
        raise BadMagic(f"not a gzip member (magic {bytes(src[:2]).hex()})")
    if src[2] != 8:
        raise UnsupportedFeature(f"gzip compression method {src[2]} is not deflate")
    flg = int(src[3])
    if flg & 0xE0:
        raise UnsupportedFeature("reserved gzip flag bits set")
    pos = 10
    if flg & 0x04:  # FEXTRA
        _need(src, pos, 2, "gzip extra field")
        xlen = int(src[pos]) | int(src[pos + 1]) << 8
        pos += 2
        _need(src, pos, xlen, "gzip extra field")
        pos += xlen
    for bit, what in ((0x08, "file name"), (0x10, "comment")):
        if flg & bit:
            while True:
                _need(src, pos, 1, f"gzip {what}")
                pos += 1
                if src[pos - 1] == 0:
                    break
    if flg & 0x02:  # FHCRC
        _need(src, pos, 2, "gzip header checksum")
        want = int(src[pos]) | int(src[pos + 1]) << 8
        if crc32(bytes(src[:pos])) & 0xFFFF != want:
            raise ChecksumMismatch("gzip header CRC mismatch")
        pos += 2
    out, end = _raw(src, pos)
    _need(src, end, 8, "gzip trailer")
    tail = bytes(src[end:end + 8])
    crc = int.from_bytes(tail[:4], "little")
    isize = int.from_bytes(tail[4:], "little")
    if crc32(out) != crc:
        raise ChecksumMismatch(f"CRC mismatch: stored {crc:08x}, computed {crc32(out):08x}")
    if len(out) & 0xFFFFFFFF != isize:
        raise LengthMismatch(f"ISIZE mismatch: stored {isize}, decoded {len(out)} bytes")
    if end + 8 != len(src):
        raise TrailingData(f"{len(src) - end - 8} bytes after the gzip member")
    return InflateResult(out, end + 8, True)


def gunzip(data: bytes) -> bytes:
    """Decode a single gzip member, verifying CRC-32 and ISIZE."""
    return gunzip_result(data).output


def zlib_result(data: bytes) -> InflateResult:
    src = _as_array(data)
    _need(src, 0, 2, "zlib header")
    cmf, flg = int(src[0]), int(src[1])
    if cmf & 0x0F != 8:
        raise BadMagic(f"zlib compression method {cmf & 0x0F} is not deflate")
    if (cmf << 8 | flg) % 31:
        raise HeaderCheckFailed("zlib header check bits are wrong")
    if cmf >> 4 > 7:
        raise UnsupportedFeature(f"zlib window size field {cmf >> 4} exceeds 7")
    if flg & 0x20:
        raise UnsupportedFeature("zlib preset dictionaries are not supported")
    out, end = _raw(src, 2)
    _need(src, end, 4, "zlib trailer")
    want = int.from_bytes(bytes(src[end:end + 4]), "big")
    if adler32(out) != want:
        raise ChecksumMismatch(f"Adler-32 mismatch: stored {want:08x}, computed {adler32(out):08x}")
    if end + 4 != len(src):
        raise TrailingData(f"{len(src) - end - 4} bytes after the zlib stream")
    return InflateResult(out, end + 4, True)


def zlib_decompress(data: bytes) -> bytes:
    return zlib_result(data).output


def detect_format(data: bytes) -> ContainerFormat:
    """gzip or zlib by header; raw DEFLATE has no magic and must be named."""
    if len(data) >= 2 and data[0] == 0x1F and data[1] == 0x8B:
        return ContainerFormat.GZIP
    if len(data) >= 2 and data[0] & 0x0F == 8 and (data[0] << 8 | data[1]) % 31 == 0:
        return ContainerFormat.ZLIB
    raise BadMagic("unrecognised container (expected gzip or zlib header)")


def decompress_result(data: bytes, fmt: ContainerFormat | str | None = None) -> InflateResult:
    fmt = detect_format(data) if fmt is None else ContainerFormat(fmt)
    if fmt is ContainerFormat.GZIP:
        return gunzip_result(data)
    if fmt is ContainerFormat.ZLIB:
        return zlib_result(data)
    return inflate_result(data)


def decompress(data: bytes, fmt: ContainerFormat | str | None = None) -> bytes:
    return decompress_result(data, fmt).output
