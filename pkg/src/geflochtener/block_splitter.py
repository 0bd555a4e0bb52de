"""Partition a token stream into at most 100 DEFLATE blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._tables import D_EXTRA, LL_EXTRA, NUM_D, NUM_LL
from .entropy_coder import histogram
from .huffman import tree_header_bits
from .lz_store import TokenStore

MAX_BLOCKS = 100
SAMPLES = 9
LINEAR_SCAN_BELOW = 32


@njit(cache=True)
def _entropy(counts):
    total = 0
    for c in counts:
        total += c
    if total == 0:
        return 0.0
    lt = np.log2(total)
    bits = 0.0
    for c in counts:
        if c > 0:
            bits += c * (lt - np.log2(c))
    return bits


@njit(cache=True)
def _estimate(litlens, dists, lo, hi):
    ll, dd = histogram(litlens, dists, lo, hi)
    bits = 3.0 + tree_header_bits(ll, dd) + _entropy(ll) + _entropy(dd)
    for s in range(NUM_LL):
        bits += ll[s] * LL_EXTRA[s]
    for s in range(NUM_D):
        bits += dd[s] * D_EXTRA[s]
    return bits


@njit(cache=True)
def _find_best_split(litlens, dists, lo, hi):
    """Interior split index minimising the two-block estimate.

    Small ranges are scanned exhaustively; larger ones sample nine evenly
    spaced points and narrow around the best until the range is exhausted.
    """
    if hi - lo < 2:
        return -1, np.inf
    if hi - lo < LINEAR_SCAN_BELOW:
        best = -1
        best_cost = np.inf
        for s in range(lo + 1, hi):
            c = _estimate(litlens, dists, lo, s) + _estimate(litlens, dists, s, hi)
            if c < best_cost:
                best_cost = c
                best = s
        return best, best_cost
    start = lo + 1
    end = hi
    best = -1
    best_cost = np.inf
    p = np.zeros(SAMPLES, dtype=np.int64)
    vp = np.zeros(SAMPLES)
    while end - start > SAMPLES:
        step = (end - start) // (SAMPLES + 1)
        bi = 0
        for i in range(SAMPLES):
            p[i] = start + (i + 1) * step
            vp[i] = _estimate(litlens, dists, lo, p[i]) + _estimate(litlens, dists, p[i], hi)
            if vp[i] < vp[bi]:
                bi = i
        if vp[bi] > best_cost:
            return best, best_cost
        best = p[bi]
        best_cost = vp[bi]
        if bi > 0:
            start = p[bi - 1]
        if bi < SAMPLES - 1:
            end = p[bi + 1]
    for s in range(start, end):
        if s <= lo or s >= hi:
            continue
        c = _estimate(litlens, dists, lo, s) + _estimate(litlens, dists, s, hi)
        if c < best_cost:
            best_cost = c
            best = s
    return best, best_cost


def estimate_block_cost(store: TokenStore, lo: int, hi: int) -> float:
    """Estimated bits for tokens ``lo:hi`` as one dynamic block: histogram
    entropy plus extra bits plus the tree description."""
    if not 0 <= lo <= hi <= len(store):
        raise IndexError(f"token range {lo}..{hi} outside store of {len(store)}")
    return float(_estimate(store.litlens, store.dists, lo, hi))


@dataclass(frozen=True)
class BlockPlan:
    split_points: tuple[int, ...] = ()

    @property
    def block_count(self) -> int:
        return len(self.split_points) + 1

    def bounds(self, n_tokens: int) -> list[tuple[int, int]]:
        edges = [0, *self.split_points, n_tokens]
        return list(zip(edges, edges[1:]))

    def byte_ranges(self, store: TokenStore) -> list[tuple[int, int]]:
        out = []
        for lo, hi in self.bounds(len(store)):
            start = int(store.positions[lo]) if lo < len(store) else store.end
            end = int(store.positions[hi]) if hi < len(store) else store.end
            out.append((start, end))
        return out

    def total_estimate(self, store: TokenStore) -> float:
        return sum(estimate_block_cost(store, lo, hi) for lo, hi in self.bounds(len(store)))


def split_blocks(store: TokenStore, max_blocks: int = MAX_BLOCKS) -> BlockPlan:
    """Repeatedly split the block whose best interior split saves the most
    estimated bits, until nothing helps or ``max_blocks`` is reached."""
    if max_blocks < 1:
        raise ValueError("max_blocks must be at least 1")
    n = len(store)
    if n < 2 or max_blocks == 1:
        return BlockPlan()
    ll, dd = store.litlens, store.dists

    def candidate(lo, hi):
        whole = _estimate(ll, dd, lo, hi)
        s, c = _find_best_split(ll, dd, lo, hi)
        return (whole - c, int(s)) if s >= 0 else (-np.inf, -1)

    blocks = {0: (n, *candidate(0, n))}
    while len(blocks) < max_blocks:
        lo = max(blocks, key=lambda k: (blocks[k][1], -k))
        hi, gain, s = blocks[lo]
        if gain <= 0:
            break
        blocks[lo] = (s, *candidate(lo, s))
        blocks[s] = (hi, *candidate(s, hi))
    return BlockPlan(tuple(sorted(k for k in blocks if k != 0)))
