import numpy as np
import pytest

from geflochtener.block_splitter import (
    MAX_BLOCKS,
    BlockPlan,
    estimate_block_cost,
    split_blocks,
)
from geflochtener.entropy_coder import plan_bits
from geflochtener.parsers import greedy_parse


def english(n, seed=0):
    words = b"the of and to in is was that for it with as his on be at by had".split()
    rng = np.random.default_rng(seed)
    return b" ".join(words[i] for i in rng.integers(0, len(words), n))[:n]


def test_text_then_random_splits_near_boundary():
    text = english(20000)
    noise = np.random.default_rng(1).integers(0, 256, 20000, dtype=np.uint8).tobytes()
    data = text + noise
    store = greedy_parse(data)
    plan = split_blocks(store)
    assert plan.block_count >= 2
    starts = [a for a, _ in plan.byte_ranges(store)[1:]]
    assert min(abs(s - len(text)) for s in starts) < 500
    assert plan_bits(store, plan.split_points) < plan_bits(store)


def test_each_split_lowers_the_estimate():
    store = greedy_parse(english(5000, 3))
    plan = split_blocks(store)
    assert plan.total_estimate(store) < estimate_block_cost(store, 0, len(store))
    # an input of one repeated byte has nothing worth separating
    assert split_blocks(greedy_parse(b"z" * 5000)).block_count == 1


def test_max_blocks_is_honoured():
    rng = np.random.default_rng(2)
    parts = [english(3000, k) if k % 2 else rng.integers(0, 256, 3000, dtype=np.uint8).tobytes()
             for k in range(12)]
    store = greedy_parse(b"".join(parts))
    assert split_blocks(store, 4).block_count <= 4
    assert split_blocks(store, 1).block_count == 1
    with pytest.raises(ValueError):
        split_blocks(store, 0)


def test_alternating_content_caps_at_hundred_blocks():
    rng = np.random.default_rng(4)
    parts = [rng.integers(4 * (k % 64), 4 * (k % 64) + 4, 600, dtype=np.uint8).tobytes() for k in range(400)]
    store = greedy_parse(b"".join(parts))
    plan = split_blocks(store)
    assert plan.block_count == MAX_BLOCKS
    assert list(plan.split_points) == sorted(set(plan.split_points))
    assert all(0 < s < len(store) for s in plan.split_points)


def test_plan_geometry():
    store = greedy_parse(b"abcdefgh" * 10)
    plan = BlockPlan((2, 5))
    assert plan.bounds(len(store)) == [(0, 2), (2, 5), (5, len(store))]
    rngs = plan.byte_ranges(store)
    assert rngs[0][0] == 0 and rngs[-1][1] == 80
    assert all(a[1] == b[0] for a, b in zip(rngs, rngs[1:]))
    assert plan.total_estimate(store) == pytest.approx(
        sum(estimate_block_cost(store, lo, hi) for lo, hi in plan.bounds(len(store))))
    with pytest.raises(IndexError):
        estimate_block_cost(store, 0, len(store) + 1)


def test_tiny_stores():
    assert split_blocks(greedy_parse(b"")).block_count == 1
    assert split_blocks(greedy_parse(b"a")).block_count == 1
