"""End-to-end compression: parse, split into blocks, entropy code, frame."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .block_splitter import MAX_BLOCKS, BlockPlan, split_blocks
from .entropy_coder import ContainerFormat, encode_deflate, plan_bits, wrap_container
from .lz_store import TokenStore
from .match_finder import DEFAULT_CHAIN_LIMIT, SCORE_POLICIES, TIE_BREAKS, MatchFinderState
from .parsers import DEFAULT_MAX_ITER, DEFAULT_PATIENCE, ParsePolicy, greedy_parse, iterate_optimal

# optimal parsing keeps a match cache per range; bound its memory
MAX_PARSE_CHUNK = 1 << 20
FAST_ITERATIONS = 15


@dataclass(frozen=True)
class CompressConfig:
    mode: str = "optimal"
    format: str = "gzip"
    iterations: int = DEFAULT_MAX_ITER
    max_blocks: int = MAX_BLOCKS
    tie_break: str = "largest-distance"
    score_policy: str = "identity"
    patience: int = DEFAULT_PATIENCE
    chain_limit: int = DEFAULT_CHAIN_LIMIT
    reparse_blocks: bool = True
    preset: str = "default"

    def __post_init__(self):
        if self.mode not in ("greedy", "optimal"):
            raise ValueError(f"mode must be greedy or optimal, not {self.mode!r}")
        ContainerFormat(self.format)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 1 <= self.max_blocks <= MAX_BLOCKS:
            raise ValueError(f"max_blocks must be in 1..{MAX_BLOCKS}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie-break {self.tie_break!r}")
        if self.score_policy not in SCORE_POLICIES:
            raise ValueError(f"unknown score policy {self.score_policy!r}")

    @classmethod
    def fast(cls, **kw) -> CompressConfig:
        return cls(iterations=FAST_ITERATIONS, preset="fast", **kw)

    def replace(self, **kw) -> CompressConfig:
        return dataclasses.replace(self, **kw)

    @property
    def policy(self) -> ParsePolicy:
        return ParsePolicy(self.tie_break, self.score_policy)


@dataclass
class CompressResult:
    data: bytes  # container bytes
    payload_bits: int
    store: TokenStore
    plan: BlockPlan
    block_types: list[int]
    iterations: list[int] = field(default_factory=list)  # per parse range
    greedy_bits: int = 0
    used_greedy: bool = False

    @property
    def blocks(self) -> int:
        return self.plan.block_count


def _chunks(start: int, end: int, size: int):
    if start == end:
        yield start, end
    while start < end:
        yield start, min(end, start + size)
        start += size


def compress_result(data: bytes, config: CompressConfig = CompressConfig()) -> CompressResult:
    data = bytes(data)
    state = MatchFinderState(data, config.chain_limit)
    state.insert_upto(len(data))
    greedy = greedy_parse(state, None, config.policy)
    gplan = split_blocks(greedy, config.max_blocks)
    greedy_bits = plan_bits(greedy, gplan.split_points)
    store, plan, iterations, used_greedy = greedy, gplan, [], True
    if config.mode == "optimal":
        ranges = gplan.byte_ranges(greedy) if config.reparse_blocks else [(0, len(data))]
        parts = []
        for a, b in ranges:
            for lo, hi in _chunks(a, b, MAX_PARSE_CHUNK):
                r = iterate_optimal(state, (lo, hi), config.iterations, config.patience,
                                    config.policy, config.chain_limit)
                parts.append(r.store)
                iterations.append(r.iterations)
        opt = TokenStore.concat(parts)
        # plan A keeps the greedy block boundaries, plan B re-splits the optimal parse
        starts = np.array([a for a, _ in ranges[1:]], dtype=np.int64)
        plan_a = BlockPlan(tuple(int(i) for i in np.searchsorted(opt.positions, starts)))
        plan_b = split_blocks(opt, config.max_blocks)
        bits_a = plan_bits(opt, plan_a.split_points)
        bits_b = plan_bits(opt, plan_b.split_points)
        plan, bits = (plan_b, bits_b) if bits_b < bits_a else (plan_a, bits_a)
        if bits <= greedy_bits:
            store, used_greedy = opt, False
        else:
            plan = gplan
    payload, types = encode_deflate(store, data, plan.split_points)
    container = wrap_container(payload, config.format, data)
    return CompressResult(container, plan_bits(store, plan.split_points), store, plan, types,
                          iterations, greedy_bits, used_greedy)


def compress(data: bytes, config: CompressConfig = CompressConfig()) -> bytes:
    return compress_result(data, config).data
