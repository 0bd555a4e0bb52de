import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geflochtener.lz_store import (
    CorruptStoreError,
    Token,
    TokenStore,
    append_lit_len_dist,
    check_token,
    expand,
)
from geflochtener.parsers import greedy_parse


def _store(tokens):
    s = TokenStore()
    for litlen, dist in tokens:
        s.append(litlen, dist)
    return s


def test_append_literal_carries_symbol():
    s = append_lit_len_dist(TokenStore(), 0, 0, ord("A"))
    assert s.tokens == [Token(ord("A"), 0)]
    assert s.tokens[0].is_literal


def test_append_match_after_ten_literals():
    s = TokenStore()
    for c in b"ABCDEFGHIJ":
        append_lit_len_dist(s, 0, 0, c)
    append_lit_len_dist(s, 10, 10)
    assert s[len(s) - 1] == Token(10, 10)
    assert s.end == 20


@pytest.mark.parametrize("length,dist", [(2, 5), (259, 1), (3, 32769), (3, -1), (300, 0)])
def test_append_rejects_out_of_range(length, dist):
    with pytest.raises(CorruptStoreError):
        check_token(length, dist)
    with pytest.raises(CorruptStoreError):
        TokenStore().append(length, dist, length if dist == 0 else None)


def test_expand_examples():
    assert expand(_store([(ord("A"), 0)])) == b"A"
    assert expand(_store([(ord("A"), 0), (ord("B"), 0), (6, 2)])) == b"ABABABAB"
    table = _store([(c, 0) for c in b"ABCDEFGHIJ"] + [(10, 10)])
    assert expand(table) == b"ABCDEFGHIJABCDEFGHIJ"


def test_expand_rejects_reference_before_start():
    s = TokenStore(np.array([ord("A"), 3]), np.array([0, 2]), np.array([0, 1]))
    with pytest.raises(CorruptStoreError):
        expand(s)
    with pytest.raises(CorruptStoreError):
        s.validate()


def test_expand_with_history():
    s = TokenStore(np.array([4]), np.array([3]), np.array([3]), start=3)
    assert expand(s, b"xyz") == b"xyzx"


def test_validate_catches_bad_positions():
    s = _store([(65, 0), (66, 0)])
    bad = TokenStore(s.litlens, s.dists, np.array([0, 2]))
    with pytest.raises(CorruptStoreError):
        bad.validate()
    s.validate()


def test_slice_and_concat_roundtrip():
    data = b"abracadabra abracadabra abracadabra"
    s = greedy_parse(data)
    parts = [s.slice(0, 3), s.slice(3, len(s))]
    assert TokenStore.concat(parts) == s
    with pytest.raises(ValueError):
        TokenStore.concat([s.slice(3, len(s)), s.slice(0, 3)])


@given(st.binary(max_size=600))
def test_parsed_store_round_trips_and_accounts_positions(data):
    s = greedy_parse(data)
    s.validate()
    assert expand(s) == data
    advance = sum(t.advance for t in s)
    assert advance == len(data) == s.byte_length()


@given(st.lists(st.tuples(st.integers(0, 255), st.integers(0, 40), st.integers(3, 258)), max_size=50))
def test_random_valid_stores_expand_consistently(spec):
    # Build any valid store: a match is only used when its distance fits.
    s = TokenStore()
    for byte, dist, length in spec:
        if 0 < dist <= s.end:
            s.append(length, dist)
        else:
            s.append(0, 0, byte)
    out = expand(s)
    assert len(out) == s.end
    s.validate()
