"""Token representation shared by the parsers and the entropy coder.

A token is a ``(litlen, dist)`` pair. ``dist == 0`` marks a literal whose byte
value sits in ``litlen``; otherwise ``litlen`` is a match length and ``dist``
the backward distance in bytes.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np
from numba import njit

from ._tables import MAX_MATCH, MIN_MATCH, WINDOW_SIZE


class CorruptStoreError(ValueError):
    """A token violates the representation invariants or references data
    before the start of the output."""


class Token(NamedTuple):
    litlen: int
    dist: int

    @property
    def is_literal(self) -> bool:
        return self.dist == 0

    @property
    def advance(self) -> int:
        return 1 if self.dist == 0 else self.litlen


def check_token(length: int, dist: int) -> None:
    if dist == 0:
        if not 0 <= length <= 255:
            raise CorruptStoreError(f"literal value {length} outside 0..255")
    elif not 1 <= dist <= WINDOW_SIZE:
        raise CorruptStoreError(f"distance {dist} outside 1..{WINDOW_SIZE}")
    elif not MIN_MATCH <= length <= MAX_MATCH:
        raise CorruptStoreError(f"match length {length} outside {MIN_MATCH}..{MAX_MATCH}")


class TokenStore:
    """Growable paired arrays of literal/length values and distances.

    ``start`` is the input offset the first token was parsed from; each token
    also records its own source position so blocks can be mapped back to bytes.
    """

    def __init__(self, litlens=None, dists=None, positions=None, start: int = 0):
        if litlens is None:
            litlens = np.empty(0, dtype=np.int32)
            dists = np.empty(0, dtype=np.int32)
        litlens = np.ascontiguousarray(litlens, dtype=np.int32)
        dists = np.ascontiguousarray(dists, dtype=np.int32)
        if litlens.shape != dists.shape:
            raise ValueError("litlens and dists must have the same length")
        if positions is None:
            adv = np.where(dists == 0, 1, litlens).astype(np.int64)
            positions = start + np.concatenate(([0], np.cumsum(adv)[:-1])) if len(adv) else np.empty(0, np.int64)
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        self._litlens = litlens
        self._dists = dists
        self._positions = positions
        self._n = len(litlens)
        self.start = start
        if self._n:
            last = self._n - 1
            self.end = int(positions[last]) + (1 if dists[last] == 0 else int(litlens[last]))
        else:
            self.end = start

    @property
    def litlens(self) -> np.ndarray:
        return self._litlens[: self._n]

    @property
    def dists(self) -> np.ndarray:
        return self._dists[: self._n]

    @property
    def positions(self) -> np.ndarray:
        return self._positions[: self._n]

    def __len__(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[Token]:
        for ll, d in zip(self.litlens.tolist(), self.dists.tolist()):
            yield Token(ll, d)

    def __getitem__(self, i: int) -> Token:
        if not -self._n <= i < self._n:
            raise IndexError(i)
        i %= self._n
        return Token(int(self._litlens[i]), int(self._dists[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TokenStore):
            return NotImplemented
        return (
            self.start == other.start
            and np.array_equal(self.litlens, other.litlens)
            and np.array_equal(self.dists, other.dists)
        )

    def __repr__(self) -> str:
        return f"TokenStore({len(self)} tokens, bytes {self.start}..{self.end})"

    @property
    def tokens(self) -> list[Token]:
        return list(self)

    def append(self, length: int, dist: int, symbol: int | None = None) -> TokenStore:
        if dist == 0:
            if symbol is None:
                symbol = length
            length = symbol
        check_token(length, dist)
        if self._n == len(self._litlens):
            cap = max(16, 2 * self._n)
            for name in ("_litlens", "_dists", "_positions"):
                old = getattr(self, name)
                new = np.empty(cap, dtype=old.dtype)
                new[: self._n] = old[: self._n]
                setattr(self, name, new)
        self._litlens[self._n] = length
        self._dists[self._n] = dist
        self._positions[self._n] = self.end
        self._n += 1
        self.end += 1 if dist == 0 else length
        return self

    def slice(self, lo: int, hi: int) -> TokenStore:
        """Tokens ``lo:hi`` as a new store starting at the first token's source."""
        start = int(self._positions[lo]) if lo < self._n else self.end
        return TokenStore(
            self.litlens[lo:hi].copy(), self.dists[lo:hi].copy(), self.positions[lo:hi].copy(), start
        )

    @classmethod
    def concat(cls, stores: list[TokenStore]) -> TokenStore:
        if not stores:
            return cls()
        for a, b in zip(stores, stores[1:]):
            if a.end != b.start:
                raise ValueError(f"stores are not contiguous: {a.end} != {b.start}")
        return cls(
            np.concatenate([s.litlens for s in stores]),
            np.concatenate([s.dists for s in stores]),
            np.concatenate([s.positions for s in stores]),
            stores[0].start,
        )

    def byte_length(self) -> int:
        return self.end - self.start

    def validate(self) -> None:
        """Check every representation invariant; raise CorruptStoreError."""
        ll, d = self.litlens, self.dists
        lit = d == 0
        if np.any(lit & ((ll < 0) | (ll > 255))):
            raise CorruptStoreError("literal value outside 0..255")
        m = ~lit
        if np.any(m & ((d < 1) | (d > WINDOW_SIZE))):
            raise CorruptStoreError("distance outside window")
        if np.any(m & ((ll < MIN_MATCH) | (ll > MAX_MATCH))):
            raise CorruptStoreError("match length outside 3..258")
        if np.any(m & (d > self.positions)):
            raise CorruptStoreError("match reaches before stream start")
        adv = np.where(lit, 1, ll).astype(np.int64)
        expect = self.start + np.concatenate(([0], np.cumsum(adv)[:-1])) if len(adv) else adv
        if not np.array_equal(expect, self.positions):
            raise CorruptStoreError("source positions do not follow token advances")


def append_lit_len_dist(store: TokenStore, length: int, dist: int, symbol: int | None = None) -> TokenStore:
    """Append one token; for literals (``dist == 0``) the byte is ``symbol``."""
    return store.append(length, dist, symbol)


@njit(cache=True)
def _expand(litlens, dists, history):
    total = 0
    for i in range(len(litlens)):
        total += 1 if dists[i] == 0 else litlens[i]
    h = len(history)
    out = np.empty(h + total, dtype=np.uint8)
    out[:h] = history
    o = h
    for i in range(len(litlens)):
        d = dists[i]
        if d == 0:
            out[o] = litlens[i]
            o += 1
        else:
            if d > o:
                return out, i
            src = o - d
            for k in range(litlens[i]):
                out[o + k] = out[src + k]
            o += litlens[i]
    return out, -1


def expand(store: TokenStore, history: bytes = b"") -> bytes:
    """Decode a store back to bytes.

    Match copies run byte by byte, so ``dist < length`` repeats the recent
    output. ``history`` supplies the bytes preceding ``store.start`` when the
    store was parsed from the middle of a larger input.
    """
    hist = np.frombuffer(history, dtype=np.uint8)
    out, bad = _expand(store.litlens, store.dists, hist)
    if bad >= 0:
        raise CorruptStoreError(f"token {bad} reaches before the start of the output")
    return out[len(hist):].tobytes()
