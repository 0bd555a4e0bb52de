import struct
import zlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geflochtener.entropy_coder import (
    DYNAMIC,
    FIXED,
    STORED,
    BitWriter,
    adler32,
    block_cost,
    crc32,
    emit_block,
    encode_deflate,
    histogram,
    plan_bits,
    stored_block_bits,
    wrap_container,
)
from geflochtener.huffman import dynamic_trees
from geflochtener.parsers import greedy_parse
from geflochtener.pipeline import CompressConfig, compress


def raw_inflate(payload: bytes) -> bytes:
    d = zlib.decompressobj(-15)
    out = d.decompress(payload) + d.flush()
    assert d.eof and not d.unused_data
    return out


def kraft(lengths) -> float:
    used = [int(x) for x in lengths if x]
    return sum(2.0 ** -x for x in used)


def test_crc32_check_value():
    assert crc32(b"123456789") == 0xCBF43926
    assert crc32(b"") == 0


def test_adler32_check_value():
    assert adler32(b"Wikipedia") == 0x11E60398
    assert adler32(b"") == 1


@given(st.binary(max_size=6000), st.binary(max_size=100))
def test_checksums_match_zlib_module(data, more):
    assert crc32(data) == zlib.crc32(data)
    assert adler32(data) == zlib.adler32(data)
    assert crc32(more, crc32(data)) == zlib.crc32(data + more)
    assert adler32(more, adler32(data)) == zlib.adler32(data + more)


def test_bitwriter_is_lsb_first():
    w = BitWriter()
    w.write_bits(1, 1)
    w.write_bits(0b10, 2)
    w.write_bits(0x1F, 5)
    w.write_bits(0xABC, 12)
    assert w.getvalue() == bytes([0b11111101, 0xBC, 0x0A])
    w.align()
    assert w.bitpos == 24
    w.write_bytes(b"xy")
    assert w.getvalue()[-2:] == b"xy"


def test_bitwriter_rejects_unaligned_bytes():
    w = BitWriter()
    w.write_bits(1, 3)
    with pytest.raises(ValueError):
        w.write_bytes(b"a")


def test_stored_block_bits():
    assert stored_block_bits(0) == 40
    assert stored_block_bits(10) == 40 + 80
    assert stored_block_bits(10, 5) == 3 + 0 + 32 + 80
    assert stored_block_bits(65536) == 2 * 40 + 8 * 65536


@pytest.mark.parametrize("btype", [STORED, FIXED, DYNAMIC])
@pytest.mark.parametrize("data", [b"", b"a", b"hello hello hello world", bytes(range(256)) * 3])
def test_each_block_type_decodes(btype, data):
    store = greedy_parse(data)
    w = BitWriter()
    n = emit_block(store, 0, len(store), True, w, data, btype)
    assert n == block_cost(store, 0, len(store))[btype]
    assert raw_inflate(w.getvalue()) == data


def test_large_stored_block_is_chunked():
    data = np.random.default_rng(0).integers(0, 256, 70000, dtype=np.uint8).tobytes()
    store = greedy_parse(data)
    w = BitWriter()
    emit_block(store, 0, len(store), True, w, data, STORED)
    assert raw_inflate(w.getvalue()) == data


@given(st.binary(max_size=3000), st.lists(st.integers(0, 3000), max_size=6))
def test_multi_block_streams(data, cuts):
    store = greedy_parse(data)
    splits = sorted({c for c in cuts if 0 < c < len(store)})
    payload, types = encode_deflate(store, data, splits)
    assert len(types) == len(splits) + 1
    assert raw_inflate(payload) == data
    assert plan_bits(store, splits) <= 8 * len(payload) < plan_bits(store, splits) + 8


def test_empty_gzip_is_twenty_bytes():
    out = compress(b"", CompressConfig(mode="greedy"))
    assert len(out) == 20
    assert zlib.decompress(out, 31) == b""


def test_container_framing():
    data = b"framing test " * 40
    store = greedy_parse(data)
    payload, _ = encode_deflate(store, data)
    gz = wrap_container(payload, "gzip", data)
    assert gz[:4] == b"\x1f\x8b\x08\x00" and gz[4:8] == b"\0\0\0\0"
    assert struct.unpack("<II", gz[-8:]) == (zlib.crc32(data), len(data))
    zl = wrap_container(payload, "zlib", data)
    assert (zl[0] * 256 + zl[1]) % 31 == 0 and zl[0] & 0x0F == 8
    assert zlib.decompress(zl) == data
    assert wrap_container(payload, "raw", data) == payload
    with pytest.raises(ValueError):
        wrap_container(payload, "lz4", data)


def test_ties_prefer_simpler_block():
    store = greedy_parse(b"")  # end-of-block only
    c = block_cost(store, 0, 0)
    assert c.fixed == 10 and c.best_type == FIXED


@given(st.lists(st.integers(0, 50), min_size=288, max_size=288),
       st.lists(st.integers(0, 50), min_size=32, max_size=32))
def test_dynamic_trees_satisfy_kraft_equality(ll, dd):
    ll = np.array(ll, dtype=np.int64)
    dd = np.array(dd, dtype=np.int64)
    ll[256] = max(ll[256], 1)
    ll_len, d_len = dynamic_trees(ll, dd)
    assert kraft(ll_len) == 1.0 and kraft(d_len) == 1.0
    assert ll_len.max() <= 15 and d_len.max() <= 15
    assert np.all(ll_len[ll > 0] > 0) and np.all(d_len[dd > 0] > 0)


def test_histogram_counts_end_of_block():
    store = greedy_parse(b"abcabcabc")
    ll, dd = histogram(store.litlens, store.dists, 0, len(store))
    assert ll[256] == 1 and ll.sum() == len(store) + 1 and dd.sum() == 1
