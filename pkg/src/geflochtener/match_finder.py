"""Sliding-window match finder: 3-byte hash chains over a 32 KB window, plus a
per-position cache of search results that the iterative parser reuses.

A search walks the chain from the newest candidate backwards and records, for
every DEFLATE distance symbol, the longest match reachable with a distance in
that symbol's range (and the smallest such distance). The overall longest
match, the per-length smallest distances (``sublen``) and both tie-break
policies are derived from that table.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from ._tables import DIST_BASE, MAX_MATCH, MIN_MATCH, WINDOW_SIZE, dist_symbol

HASH_BITS = 16
HASH_SIZE = 1 << HASH_BITS
HASH_MASK = HASH_SIZE - 1
DEFAULT_CHAIN_LIMIT = 8192
MAX_ENTRIES = 30  # one per distance symbol

TIE_BREAKS = ("largest-distance", "smallest-distance")
SCORE_POLICIES = ("identity", "distance-penalty")
PENALTY_DISTANCE = 1024


@njit(cache=True)
def _hash_at(data, pos):
    n = len(data)
    v = np.uint32(0)
    for k in range(3):
        v = v << np.uint32(8)
        if pos + k < n:
            v = v | np.uint32(data[pos + k])
    # near the end only the available bytes contribute; tag the count so a
    # short tail never shares a bucket with a full 3-byte prefix by accident
    v = v | np.uint32(min(3, n - pos) << 24)
    return np.int64(((v * np.uint32(2654435761)) >> np.uint32(32 - HASH_BITS)) & np.uint32(HASH_MASK))


@njit(cache=True)
def _insert_range(data, head, prev, lo, hi):
    for pos in range(lo, hi):
        h = _hash_at(data, pos)
        prev[pos] = head[h]
        head[h] = pos


@njit(cache=True)
def _run_lengths(data):
    """same[i] = number of consecutive bytes equal to data[i] starting at i."""
    n = len(data)
    same = np.zeros(n, dtype=np.int32)
    i = n - 1
    while i >= 0:
        if i + 1 < n and data[i + 1] == data[i]:
            same[i] = same[i + 1] + 1
        else:
            same[i] = 1
        i -= 1
    return same


@njit(cache=True)
def _back_runs(data):
    """back[i] = number of consecutive bytes equal to data[i] ending at i."""
    n = len(data)
    back = np.zeros(n, dtype=np.int32)
    for i in range(n):
        back[i] = back[i - 1] + 1 if i > 0 and data[i - 1] == data[i] else 1
    return back


@njit(cache=True)
def _match_length(data, same, pos, cand, limit):
    i = 0
    if data[pos] == data[cand]:
        s = min(same[pos], same[cand])
        if s > limit:
            s = limit
        i = s
    while i < limit and data[pos + i] == data[cand + i]:
        i += 1
    return i


@njit(cache=True)
def _search(data, prev, same, back, pos, limit, chain_limit, want_far, out_dist, out_reach):
    """Walk the chain at ``pos``. Fills per-symbol (dist, reach) entries in
    increasing distance order; returns (n_entries, best_len, near, far)."""
    reach = np.zeros(MAX_ENTRIES, dtype=np.int64)
    rdist = np.zeros(MAX_ENTRIES, dtype=np.int64)
    best = 0
    near = 0
    far = 0
    if limit >= MIN_MATCH:
        cand = prev[pos]
        visits = 0
        while cand >= 0 and visits < chain_limit:
            d = pos - cand
            if d > WINDOW_SIZE:
                break
            visits += 1
            ds = dist_symbol(d)
            r = reach[ds]
            if r == limit and not want_far:
                cand = prev[cand]
                continue
            useful = r == 0 or (r < limit and data[cand + r] == data[pos + r])
            if want_far and best >= MIN_MATCH and data[cand + best - 1] == data[pos + best - 1]:
                useful = True
            if useful:
                ln = _match_length(data, same, pos, cand, limit)
                if ln > r:
                    reach[ds] = ln
                    rdist[ds] = d
                if ln > best:
                    best = ln
                    near = d
                    far = d
                elif ln == best:
                    far = d
            if same[pos] >= limit and same[cand] >= limit and data[cand] == data[pos]:
                # Inside a long run every earlier position of the run is the
                # next chain link and also matches the full limit, so fill
                # their entries directly and jump to the end of the run.
                lo = max(cand - back[cand] + 1, pos - WINDOW_SIZE, cand - (chain_limit - visits))
                if lo < cand:
                    dmin = pos - cand + 1
                    dmax = pos - lo
                    for ds in range(dist_symbol(dmin), dist_symbol(dmax) + 1):
                        if reach[ds] < limit:
                            reach[ds] = limit
                            rdist[ds] = max(dmin, DIST_BASE[ds])
                    best = limit
                    far = dmax
                    visits += cand - lo
                    cand = lo
            cand = prev[cand]
    n = 0
    for ds in range(MAX_ENTRIES):
        if reach[ds] >= MIN_MATCH:
            out_dist[n] = rdist[ds]
            out_reach[n] = reach[ds]
            n += 1
    if best < MIN_MATCH:
        return n, 0, 0, 0
    return n, best, near, far


@njit(cache=True)
def _cached_search(data, prev, same, back, chain_limit, pos, limit, want_far, use_cache,
                   base, c_lim, c_best, c_near, c_far, c_off, c_cnt, pool_d, pool_r, meta,
                   out_dist, out_reach):
    """Search through the cache. Returns (n, best, near, far, pool_d, pool_r);
    the pools are returned because they may have been reallocated."""
    i = pos - base
    if use_cache and c_lim[i] == limit and (not want_far or c_far[i] >= 0):
        n = c_cnt[i]
        off = c_off[i]
        for k in range(n):
            out_dist[k] = pool_d[off + k]
            out_reach[k] = pool_r[off + k]
        return n, c_best[i], c_near[i], c_far[i], pool_d, pool_r
    n, best, near, far = _search(data, prev, same, back, pos, limit, chain_limit, want_far, out_dist, out_reach)
    if use_cache:
        if c_lim[i] == limit:
            # entries already stored; only the far distance was missing
            c_far[i] = far
        elif c_lim[i] < 0:
            used = meta[0]
            if used + n > len(pool_d):
                cap = max(2 * len(pool_d), used + n + 1024)
                nd = np.empty(cap, dtype=pool_d.dtype)
                nr = np.empty(cap, dtype=pool_r.dtype)
                nd[:used] = pool_d[:used]
                nr[:used] = pool_r[:used]
                pool_d = nd
                pool_r = nr
            for k in range(n):
                pool_d[used + k] = out_dist[k]
                pool_r[used + k] = out_reach[k]
            c_off[i] = used
            c_cnt[i] = n
            meta[0] = used + n
            c_lim[i] = limit
            c_best[i] = best
            c_near[i] = near
            c_far[i] = far if want_far else -1
    return n, best, near, far, pool_d, pool_r


class MatchFinderState:
    """Hash chains over an immutable input.

    Positions are inserted in increasing order; ``prev[p]`` links ``p`` to the
    previous position with the same hash, so a query at ``p`` never sees later
    positions regardless of how far insertion has progressed.
    """

    def __init__(self, data: bytes, chain_limit: int = DEFAULT_CHAIN_LIMIT):
        self.data = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
        n = len(self.data)
        self.window_size = WINDOW_SIZE
        self.chain_limit = chain_limit
        self.head = np.full(HASH_SIZE, -1, dtype=np.int64)
        self.prev = np.full(n, -1, dtype=np.int64)
        self.same = _run_lengths(self.data) if n else np.zeros(0, dtype=np.int32)
        self.back = _back_runs(self.data) if n else np.zeros(0, dtype=np.int32)
        self.inserted = 0

    def __len__(self) -> int:
        return len(self.data)

    def hash_at(self, pos: int) -> int:
        return int(_hash_at(self.data, pos))

    def update_hash(self, pos: int) -> MatchFinderState:
        """Insert ``pos`` as the newest entry of its hash bucket."""
        if pos != self.inserted:
            raise ValueError(f"positions must be inserted in order; expected {self.inserted}, got {pos}")
        _insert_range(self.data, self.head, self.prev, pos, pos + 1)
        self.inserted = pos + 1
        return self

    def insert_upto(self, end: int) -> MatchFinderState:
        end = min(end, len(self.data))
        if end > self.inserted:
            _insert_range(self.data, self.head, self.prev, self.inserted, end)
            self.inserted = end
        return self

    def chain(self, hash_value: int) -> list[int]:
        """Positions in the bucket, newest first."""
        out = []
        p = int(self.head[hash_value])
        while p >= 0:
            out.append(p)
            p = int(self.prev[p])
        return out


class LongestMatchCache:
    """Per-position memo of search results for positions in ``[start, end)``.

    Each entry is written once, keyed by the search limit; a lookup with a
    different limit falls through to a fresh search.
    """

    def __init__(self, start: int, end: int):
        n = max(0, end - start)
        self.start = start
        self.end = end
        self.limit = np.full(n, -1, dtype=np.int32)
        self.best_length = np.zeros(n, dtype=np.int32)
        self.best_dist = np.zeros(n, dtype=np.int32)
        self.far_dist = np.full(n, -1, dtype=np.int32)
        self.offset = np.zeros(n, dtype=np.int64)
        self.count = np.zeros(n, dtype=np.int32)
        self.pool_dist = np.empty(max(1024, 2 * n), dtype=np.int32)
        self.pool_reach = np.empty(max(1024, 2 * n), dtype=np.int32)
        self.meta = np.zeros(1, dtype=np.int64)

    def __contains__(self, pos: int) -> bool:
        return self.start <= pos < self.end and self.limit[pos - self.start] >= 0

    def kernel_args(self):
        return (self.start, self.limit, self.best_length, self.best_dist, self.far_dist,
                self.offset, self.count, self.pool_dist, self.pool_reach, self.meta)

    def adopt_pools(self, pool_dist, pool_reach) -> None:
        self.pool_dist = pool_dist
        self.pool_reach = pool_reach


_NO_CACHE = LongestMatchCache(0, 0)


class Match(NamedTuple):
    length: int
    dist: int
    sublen: np.ndarray  # sublen[l] = smallest distance reaching length l, 0 if none
    entries: tuple  # ((dist, reach), ...) one per distance symbol, increasing distance


def sublen_from_entries(entries, limit: int) -> np.ndarray:
    sub = np.zeros(max(limit, 0) + 1, dtype=np.int64)
    for dist, reach in reversed(entries):
        sub[MIN_MATCH:reach + 1] = dist
    return sub


def find_longest_match(
    state: MatchFinderState,
    pos: int,
    limit: int = MAX_MATCH,
    cache: LongestMatchCache | None = None,
    tie_break: str = "largest-distance",
) -> Match:
    """Longest match at ``pos`` of at most ``limit`` bytes against the window.

    Among equal-length candidates the distance follows ``tie_break``. Returns
    length 0 and distance 0 when nothing of at least 3 bytes matches.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie-break {tie_break!r}")
    n = len(state.data)
    if not 0 <= pos < n:
        raise IndexError(pos)
    limit = min(limit, MAX_MATCH, n - pos)
    state.insert_upto(pos + 1)
    want_far = tie_break == "largest-distance"
    c = cache if cache is not None and pos in range(cache.start, cache.end) else _NO_CACHE
    out_d = np.zeros(MAX_ENTRIES, dtype=np.int64)
    out_r = np.zeros(MAX_ENTRIES, dtype=np.int64)
    k, best, near, far, pd, pr = _cached_search(
        state.data, state.prev, state.same, state.back, state.chain_limit, pos, limit, want_far,
        c is not _NO_CACHE, *c.kernel_args(), out_d, out_r,
    )
    if c is not _NO_CACHE:
        c.adopt_pools(pd, pr)
    entries = tuple((int(out_d[i]), int(out_r[i])) for i in range(k))
    dist = far if want_far else near
    return Match(int(best), int(dist), sublen_from_entries(entries, limit), entries)


def length_score(length: int, dist: int, policy: str = "identity") -> int:
    """Score of a candidate match; the match length itself by default.

    ``distance-penalty`` knocks one byte off matches further than 1024 back.
    """
    if policy == "identity":
        return length
    if policy == "distance-penalty":
        return length - 1 if dist > PENALTY_DISTANCE and length > 0 else length
    raise ValueError(f"unknown score policy {policy!r}")
