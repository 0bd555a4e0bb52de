"""Deterministic fuzz inputs shared by the round-trip and format suites."""

from __future__ import annotations

import numpy as np

KINDS = ("random", "text", "repetitive", "zeros", "binary")
MAX_SIZE = 65536

_WORDS = (b"the of and to in is was that for it with as his on be at by had are not this "
          b"but from or have an they which one you were her all she there would their we "
          b"him been has when who will more no if out so said what up its about into than").split()


def _size(rng: np.random.Generator, large_share: float) -> int:
    if rng.random() < large_share:
        return int(np.exp(rng.uniform(np.log(4096), np.log(MAX_SIZE + 1))))
    return int(np.exp(rng.uniform(0, np.log(4097)))) - 1


def make_input(rng: np.random.Generator, kind: str, n: int) -> bytes:
    if kind == "random":
        return rng.integers(0, 256, n, dtype=np.uint8).tobytes()
    if kind == "text":
        out = bytearray()
        while len(out) < n:
            out += _WORDS[rng.integers(len(_WORDS))]
            out += b"\n" if rng.random() < 0.08 else b" "
        return bytes(out[:n])
    if kind == "repetitive":
        period = rng.integers(1, 300)
        unit = rng.integers(0, 256, period, dtype=np.uint8)
        buf = np.resize(unit, n)
        flips = rng.random(n) < rng.choice([0.0, 0.001, 0.02])
        buf[flips] = rng.integers(0, 256, int(flips.sum()), dtype=np.uint8)
        return buf.tobytes()
    if kind == "zeros":
        return bytes(n)
    if kind == "binary":
        if rng.random() < 0.5:
            alphabet = rng.integers(0, 256, rng.integers(2, 4), dtype=np.uint8)
            return rng.choice(alphabet, n).tobytes()
        vals = np.cumsum(rng.integers(-3, 4, n // 4 + 1)).astype("<i4")
        return vals.tobytes()[:n]
    raise ValueError(kind)


def fuzz_inputs(count: int, seed: int = 0, large_share: float = 0.01):
    """``count`` inputs cycling through KINDS. Most are at most 4 KB; a
    ``large_share`` fraction reaches up to 64 KB, and the first input of each
    kind at the largest size is always included."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        kind = KINDS[i % len(KINDS)]
        n = MAX_SIZE if i < len(KINDS) else _size(rng, large_share)
        yield kind, make_input(rng, kind, n)
