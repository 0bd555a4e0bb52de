"""Greedy and entropy-driven shortest-path LZ77 parsing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._tables import (
    D_EXTRA,
    DIST_EXTRA,
    LENGTH_EXTRA_BITS,
    LENGTH_SYMBOL,
    MAX_MATCH,
    MIN_MATCH,
    NUM_D,
    NUM_LL,
    dist_symbol,
)
from .entropy_coder import encoded_bits, histogram
from .lz_store import TokenStore
from .match_finder import (
    DEFAULT_CHAIN_LIMIT,
    MAX_ENTRIES,
    PENALTY_DISTANCE,
    SCORE_POLICIES,
    TIE_BREAKS,
    LongestMatchCache,
    MatchFinderState,
    _cached_search,
)

DEFAULT_MAX_ITER = 100
DEFAULT_PATIENCE = 5


class ParseError(AssertionError):
    """A parser emitted a match that does not reproduce the input."""


@dataclass(frozen=True)
class ParseRange:
    instart: int
    inend: int

    def __post_init__(self):
        if not 0 <= self.instart <= self.inend:
            raise ValueError(f"bad parse range {self.instart}..{self.inend}")

    def __len__(self) -> int:
        return self.inend - self.instart


@dataclass(frozen=True)
class ParsePolicy:
    tie_break: str = "largest-distance"
    score: str = "identity"

    def __post_init__(self):
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie-break {self.tie_break!r}")
        if self.score not in SCORE_POLICIES:
            raise ValueError(f"unknown score policy {self.score!r}")


def _prepare(data, rng, chain_limit):
    state = data if isinstance(data, MatchFinderState) else MatchFinderState(data, chain_limit)
    n = len(state.data)
    if rng is None:
        rng = ParseRange(0, n)
    elif not isinstance(rng, ParseRange):
        rng = ParseRange(*rng)
    if rng.inend > n:
        raise ValueError(f"parse range ends at {rng.inend} beyond input length {n}")
    state.insert_upto(rng.inend)
    return state, rng


def _cache_for(cache, rng):
    if cache is None:
        return LongestMatchCache(0, 0), False
    if cache.start > rng.instart or cache.end < rng.inend:
        raise ValueError("cache does not cover the parse range")
    return cache, True


# ---------------------------------------------------------------- greedy

@njit(cache=True)
def _greedy(data, prev, same, back, chain_limit, instart, inend, want_far, penalty, use_cache,
            base, c_lim, c_best, c_near, c_far, c_off, c_cnt, pool_d, pool_r, meta):
    m = inend - instart
    litlens = np.empty(m, dtype=np.int32)
    dists = np.empty(m, dtype=np.int32)
    positions = np.empty(m, dtype=np.int64)
    out_d = np.zeros(MAX_ENTRIES, dtype=np.int64)
    out_r = np.zeros(MAX_ENTRIES, dtype=np.int64)
    i = instart
    k = 0
    while i < inend:
        limit = min(MAX_MATCH, inend - i)
        n, best, near, far, pool_d, pool_r = _cached_search(
            data, prev, same, back, chain_limit, i, limit, want_far, use_cache,
            base, c_lim, c_best, c_near, c_far, c_off, c_cnt, pool_d, pool_r, meta, out_d, out_r)
        dist = far if want_far else near
        score = best
        if penalty and best > 0 and dist > PENALTY_DISTANCE:
            score = best - 1
        positions[k] = i
        if score >= MIN_MATCH:
            litlens[k] = score
            dists[k] = dist
            i += score
        else:
            litlens[k] = data[i]
            dists[k] = 0
            i += 1
        k += 1
    return litlens[:k].copy(), dists[:k].copy(), positions[:k].copy(), pool_d, pool_r


def greedy_parse(data, rng: ParseRange | tuple | None = None, policy: ParsePolicy = ParsePolicy(),
                 cache: LongestMatchCache | None = None, chain_limit: int = DEFAULT_CHAIN_LIMIT) -> TokenStore:
    """Longest-match-first parse of ``data[instart:inend]``.

    At every position the scored match length is taken when it reaches
    MIN_MATCH (advancing past it), otherwise one literal is emitted.
    """
    state, rng = _prepare(data, rng, chain_limit)
    c, use = _cache_for(cache, rng)
    ll, dd, pos, pd, pr = _greedy(
        state.data, state.prev, state.same, state.back, state.chain_limit, rng.instart, rng.inend,
        policy.tie_break == "largest-distance", policy.score == "distance-penalty", use, *c.kernel_args())
    if use:
        c.adopt_pools(pd, pr)
    store = TokenStore(ll, dd, pos, rng.instart)
    verify_store(store, state.data)
    return store


# ---------------------------------------------------------------- verification

def verify_len_dist(data, pos: int, length: int, dist: int) -> bool:
    """True when copying ``length`` bytes from ``dist`` back reproduces
    ``data[pos:pos+length]`` (overlapping copies included)."""
    if dist < 1 or dist > pos or pos + length > len(data):
        return False
    # an overlapping copy repeats with period dist, which is exactly what
    # comparing against the shifted input checks position by position
    return bytes(data[pos:pos + length]) == bytes(data[pos - dist:pos - dist + length])


@njit(cache=True)
def _first_bad_match(data, litlens, dists, positions):
    for i in range(len(dists)):
        d = dists[i]
        if d == 0:
            if litlens[i] != data[positions[i]]:
                return i
            continue
        p = positions[i]
        ln = litlens[i]
        if d > p or p + ln > len(data):
            return i
        for k in range(ln):
            if data[p + k] != data[p - d + k]:
                return i
    return -1


def verify_store(store: TokenStore, data) -> None:
    """Check every token against the input; raise ParseError on the first
    inconsistent one."""
    arr = data if isinstance(data, np.ndarray) else np.frombuffer(bytes(data), dtype=np.uint8)
    bad = int(_first_bad_match(arr, store.litlens, store.dists, store.positions))
    if bad >= 0:
        t = store[bad]
        raise ParseError(
            f"token {bad} at byte {int(store.positions[bad])} (length {t.litlen}, dist {t.dist}) "
            "does not reproduce the input")


# ---------------------------------------------------------------- statistics and costs

@dataclass(frozen=True, eq=False)
class SymbolStats:
    litlen_counts: np.ndarray
    dist_counts: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolStats):
            return NotImplemented
        return (np.array_equal(self.litlen_counts, other.litlen_counts)
                and np.array_equal(self.dist_counts, other.dist_counts))


def compute_stats(store: TokenStore) -> SymbolStats:
    """Symbol frequencies under the DEFLATE alphabets, end-of-block counted once."""
    ll, dd = histogram(store.litlens, store.dists, 0, len(store))
    return SymbolStats(ll, dd)


def _entropy_bits(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    if total == 0:
        return np.full(len(counts), math.log2(len(counts)))
    c = np.where(counts > 0, counts, 0.5).astype(np.float64)
    return math.log2(total) - np.log2(c)


@dataclass(frozen=True, eq=False)
class SymbolCostModel:
    """Fractional bit cost per DEFLATE symbol, plus optional extra bits."""

    litlen_bits: np.ndarray
    dist_bits: np.ndarray
    extra_bits: bool = True
    _tables: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ll = np.ascontiguousarray(self.litlen_bits, dtype=np.float64)
        dd = np.ascontiguousarray(self.dist_bits, dtype=np.float64)
        lit = ll[:256].copy()
        len_cost = np.full(MAX_MATCH + 1, np.inf)
        len_cost[MIN_MATCH:] = ll[LENGTH_SYMBOL[MIN_MATCH:]]
        dsym = dd[:30].copy()
        if self.extra_bits:
            len_cost[MIN_MATCH:] = len_cost[MIN_MATCH:] + LENGTH_EXTRA_BITS[MIN_MATCH:]
            dsym = dsym + DIST_EXTRA
        object.__setattr__(self, "_tables", (lit, len_cost, dsym))

    @classmethod
    def from_stats(cls, stats: SymbolStats) -> SymbolCostModel:
        """-log2 of each symbol's share; unseen symbols count as half an occurrence."""
        return cls(_entropy_bits(stats.litlen_counts), _entropy_bits(stats.dist_counts))

    @classmethod
    def uniform(cls) -> SymbolCostModel:
        """Every token costs one unit, so the cheapest parse has the fewest tokens."""
        return cls(np.ones(NUM_LL), np.zeros(NUM_D), extra_bits=False)

    @classmethod
    def fixed_huffman(cls) -> SymbolCostModel:
        from ._tables import FIXED_D_LENGTHS, FIXED_LL_LENGTHS
        return cls(FIXED_LL_LENGTHS.astype(np.float64), FIXED_D_LENGTHS.astype(np.float64))

    @property
    def tables(self):
        return self._tables

    def bit_cost(self, litlen: int, dist: int) -> float:
        lit, len_cost, dsym = self._tables
        if dist == 0:
            return float(lit[litlen])
        return float(len_cost[litlen] + dsym[dist_symbol(dist)])

    def store_cost(self, store: TokenStore) -> float:
        """Modeled cost of a parse, summed token by token from the front."""
        return float(_store_cost(store.litlens, store.dists, *self._tables))


@njit(cache=True)
def _store_cost(litlens, dists, lit, len_cost, dsym):
    total = 0.0
    for i in range(len(dists)):
        if dists[i] == 0:
            total = total + lit[litlens[i]]
        else:
            total = total + (len_cost[litlens[i]] + dsym[dist_symbol(dists[i])])
    return total


# ---------------------------------------------------------------- shortest path

@njit(cache=True)
def _shortest_path(data, prev, same, back, chain_limit, instart, inend, lit, len_cost, dsym, use_cache,
                   base, c_lim, c_best, c_near, c_far, c_off, c_cnt, pool_d, pool_r, meta):
    m = inend - instart
    cost = np.full(m + 1, np.inf)
    cost[0] = 0.0
    from_len = np.zeros(m + 1, dtype=np.int32)
    from_dist = np.zeros(m + 1, dtype=np.int32)
    out_d = np.zeros(MAX_ENTRIES, dtype=np.int64)
    out_r = np.zeros(MAX_ENTRIES, dtype=np.int64)
    sd = np.zeros(MAX_ENTRIES, dtype=np.int64)
    sr = np.zeros(MAX_ENTRIES, dtype=np.int64)
    for i in range(m):
        pos = instart + i
        ci = cost[i]
        c = ci + lit[data[pos]]
        if c < cost[i + 1]:
            cost[i + 1] = c
            from_len[i + 1] = 1
            from_dist[i + 1] = 0
        limit = min(MAX_MATCH, inend - pos)
        if limit < MIN_MATCH:
            continue
        n, best, near, far, pool_d, pool_r = _cached_search(
            data, prev, same, back, chain_limit, pos, limit, False, use_cache,
            base, c_lim, c_best, c_near, c_far, c_off, c_cnt, pool_d, pool_r, meta, out_d, out_r)
        if n == 0:
            continue
        # entries by decreasing reach (stable, so ties keep increasing distance)
        for a in range(n):
            sd[a] = out_d[a]
            sr[a] = out_r[a]
        for a in range(1, n):
            kd = sd[a]
            kr = sr[a]
            b = a - 1
            while b >= 0 and sr[b] < kr:
                sd[b + 1] = sd[b]
                sr[b + 1] = sr[b]
                b -= 1
            sd[b + 1] = kd
            sr[b + 1] = kr
        # sweep lengths downwards; every entry reaching l offers its symbol
        j = 0
        best_dc = np.inf
        best_dist = 0
        for ln in range(sr[0], MIN_MATCH - 1, -1):
            while j < n and sr[j] >= ln:
                dc = dsym[dist_symbol(sd[j])]
                if dc < best_dc or (dc == best_dc and sd[j] < best_dist):
                    best_dc = dc
                    best_dist = sd[j]
                j += 1
            c = ci + (len_cost[ln] + best_dc)
            if c < cost[i + ln]:
                cost[i + ln] = c
                from_len[i + ln] = ln
                from_dist[i + ln] = best_dist
    # reverse traversal from the end recovers the cheapest token sequence
    count = 0
    j = m
    while j > 0:
        j -= from_len[j]
        count += 1
    litlens = np.empty(count, dtype=np.int32)
    dists = np.empty(count, dtype=np.int32)
    positions = np.empty(count, dtype=np.int64)
    j = m
    k = count - 1
    while j > 0:
        ln = from_len[j]
        d = from_dist[j]
        j -= ln
        positions[k] = instart + j
        if d == 0:
            litlens[k] = data[instart + j]
            dists[k] = 0
        else:
            litlens[k] = ln
            dists[k] = d
        k -= 1
    return litlens, dists, positions, cost[m], pool_d, pool_r


@dataclass
class ShortestPath:
    store: TokenStore
    cost: float


def shortest_path_parse(data, rng: ParseRange | tuple | None = None, costs: SymbolCostModel | None = None,
                        cache: LongestMatchCache | None = None,
                        chain_limit: int = DEFAULT_CHAIN_LIMIT) -> ShortestPath:
    """Cheapest parse of the range under ``costs``.

    Forward pass relaxes every literal and every reachable (length, distance
    symbol) edge; the token sequence is recovered backwards from the end.
    """
    state, rng = _prepare(data, rng, chain_limit)
    costs = SymbolCostModel.fixed_huffman() if costs is None else costs
    c, use = _cache_for(cache, rng)
    lit, len_cost, dsym = costs.tables
    ll, dd, pos, total, pd, pr = _shortest_path(
        state.data, state.prev, state.same, state.back, state.chain_limit, rng.instart, rng.inend,
        lit, len_cost, dsym, use, *c.kernel_args())
    if use:
        c.adopt_pools(pd, pr)
    store = TokenStore(ll, dd, pos, rng.instart)
    verify_store(store, state.data)
    return ShortestPath(store, float(total))


# ---------------------------------------------------------------- iteration

@dataclass
class OptimalResult:
    store: TokenStore
    bits: int
    iterations: int
    history: list[int] = field(default_factory=list)  # encoded bits per iteration (0 = greedy seed)
    best_history: list[int] = field(default_factory=list)
    greedy: TokenStore | None = None


def randomize_stats(stats: SymbolStats, rng: np.random.Generator) -> SymbolStats:
    """Shuffle-perturb frequencies: each count is swapped with a random one
    with probability 1/3 (off unless a perturbation seed is supplied)."""
    out = []
    for counts in (stats.litlen_counts, stats.dist_counts):
        c = counts.copy()
        n = len(c)
        for i in range(n):
            if rng.integers(3) == 0:
                c[i] = c[rng.integers(n)]
        out.append(c)
    out[0][256] = max(out[0][256], 1)
    return SymbolStats(*out)


def iterate_optimal(data, rng: ParseRange | tuple | None = None, max_iter: int = DEFAULT_MAX_ITER,
                    patience: int = DEFAULT_PATIENCE, policy: ParsePolicy = ParsePolicy(),
                    chain_limit: int = DEFAULT_CHAIN_LIMIT, perturb_seed: int | None = None,
                    use_cache: bool = True) -> OptimalResult:
    """Alternate cost modelling and shortest-path parsing.

    The greedy parse seeds the first model; each round re-derives symbol
    costs from the previous parse. The parse with the smallest encoded size
    seen (greedy included) is returned. Stops after ``max_iter`` rounds, when
    the statistics reach a fixed point, or after ``patience`` rounds without
    improvement.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    state, rng = _prepare(data, rng, chain_limit)
    cache = LongestMatchCache(rng.instart, rng.inend) if use_cache else None
    greedy = greedy_parse(state, rng, policy, cache)
    best = greedy
    best_bits = encoded_bits(greedy)
    history = [best_bits]
    best_history = [best_bits]
    stats = compute_stats(greedy)
    perturb = np.random.default_rng(perturb_seed) if perturb_seed is not None else None
    stale = 0
    it = 0
    while it < max_iter:
        it += 1
        store = shortest_path_parse(state, rng, SymbolCostModel.from_stats(stats), cache).store
        bits = encoded_bits(store)
        history.append(bits)
        if bits < best_bits:
            best, best_bits, stale = store, bits, 0
        else:
            stale += 1
        best_history.append(best_bits)
        new_stats = compute_stats(store)
        if stale >= patience:
            if perturb is None:
                break
            new_stats = randomize_stats(new_stats, perturb)
            stale = 0
        elif new_stats == stats and perturb is None:
            break
        stats = new_stats
    return OptimalResult(best, best_bits, it, history, best_history, greedy)
