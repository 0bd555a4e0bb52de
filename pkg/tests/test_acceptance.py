"""Acceptance suite: one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; they are also repeated in the terminal summary. Environment knobs:

    GEFLOCHTENER_CORPUS_DIR      root holding canterbury/, calgary/, enwik8/
    GEFLOCHTENER_ORACLE_BUDGET   seconds for the exhaustive parse oracle (default 120)
"""

import os
import time
import zlib

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fuzzcases import fuzz_inputs, make_input
from geflochtener import bench, compress_result, decompress
from geflochtener.bench import (
    CALGARY,
    CANTERBURY,
    ENWIK8,
    LINK_SPEEDS,
    REFERENCE_SIZES,
    REFERENCE_TIMES,
    check_corpus,
    compression_percentage,
    corpus_dir,
    transmit_time_ms,
)
from geflochtener.entropy_coder import crc32
from geflochtener.huffman import build_length_limited_huffman
from geflochtener.inflate import InflateError, gunzip_result, inflate, zlib_result
from geflochtener.match_finder import MatchFinderState, find_longest_match
from geflochtener.parsers import (
    SymbolCostModel,
    compute_stats,
    greedy_parse,
    iterate_optimal,
    shortest_path_parse,
)
from geflochtener.pipeline import CompressConfig
from oracles import longest_match_brute, min_parse_cost, walk_blocks

FUZZ_COUNT = 10_000
RUNTIME_TARGET_S = 300
GREEDY = CompressConfig(mode="greedy")
OPTIMAL = CompressConfig()


def verdict(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def present(spec):
    d = corpus_dir(spec)
    missing = {x.split(":")[0].split("/", 1)[1] for x in check_corpus(spec, d)}
    return [(name, d / name) for name, _ in spec.members if name not in missing]


# ---------------------------------------------------------------- shared runs

class Run:
    """Outcome of compressing one input in one mode."""

    __slots__ = ("ok", "verified", "blob", "store", "blocks", "kind", "size", "out_size")

    def __init__(self, data, config, kind=""):
        r = compress_result(data, config)
        try:
            res = gunzip_result(r.data)
            self.ok = res.output == data
            self.verified = res.checksum_verified
        except InflateError:
            self.ok = self.verified = False
        self.blob = r.data if len(data) <= 4096 else None
        self.store = r.store
        self.blocks = r.blocks
        self.kind = kind
        self.size = len(data)
        self.out_size = len(r.data)


@pytest.fixture(scope="module")
def fuzz_runs():
    t = time.perf_counter()
    runs = []
    for kind, data in fuzz_inputs(FUZZ_COUNT, seed=2024):
        runs.append((data, Run(data, GREEDY, kind), Run(data, OPTIMAL, kind)))
    return runs, time.perf_counter() - t


@pytest.fixture(scope="module")
def corpus_runs():
    t = time.perf_counter()
    out = {}
    for spec in (CANTERBURY, CALGARY):
        for name, path in present(spec):
            data = path.read_bytes()
            out[(spec.name, name)] = (Run(data, GREEDY), Run(data, OPTIMAL))
    return out, time.perf_counter() - t


# ---------------------------------------------------------------- 1

def test_criterion_1_round_trip(fuzz_runs, corpus_runs):
    runs, t_fuzz = fuzz_runs
    corpus, t_corpus = corpus_runs
    bad = sum(not g.ok for _, g, _ in runs) + sum(not o.ok for _, _, o in runs)
    kinds = sorted({g.kind for _, g, _ in runs})
    largest = max(g.size for _, g, _ in runs)
    cant = [k for k in corpus if k[0] == "canterbury"]
    cant_bad = sum(not (g.ok and o.ok) for k, (g, o) in corpus.items() if k[0] == "canterbury")
    total = t_fuzz + t_corpus
    ok = (bad == 0 and cant_bad == 0 and len(cant) == len(CANTERBURY.members)
          and total < RUNTIME_TARGET_S)
    verdict(1, "round-trip correctness", ok,
            f"{len(runs)} fuzz inputs x 2 modes, {bad} mismatches, kinds {'/'.join(kinds)}, "
            f"largest {largest} B; Canterbury {len(cant)}/{len(CANTERBURY.members)} files present, "
            f"{cant_bad} mismatches; {total:.0f} s against a {RUNTIME_TARGET_S} s target")


# ---------------------------------------------------------------- 2

def test_criterion_2_format_conformance(fuzz_runs, corpus_runs):
    runs, _ = fuzz_runs
    corpus, _ = corpus_runs
    allruns = [r for _, g, o in runs for r in (g, o)] + [r for pair in corpus.values() for r in pair]
    unverified = sum(not r.verified for r in allruns)

    zlib_bad = 0
    zlib_n = 0
    for data, _, _ in runs[::10]:
        blob = compress_result(data, GREEDY.replace(format="zlib")).data
        zlib_n += 1
        cmf, flg = blob[0], blob[1]
        res = zlib_result(blob)
        if (cmf * 256 + flg) % 31 or cmf & 0x0F != 8 or res.output != data or not res.checksum_verified:
            zlib_bad += 1

    rng = np.random.default_rng(7)
    pool = [(d, r.blob) for d, g, o in runs for r in (g, o) if r.blob is not None and len(r.blob) > 20]
    wrong = diagnosed = untouched = 0
    other = []
    mutations = 5000
    for _ in range(mutations):
        data, blob = pool[rng.integers(len(pool))]
        m = bytearray(blob)
        op = rng.integers(3)
        if op == 0:
            for _ in range(rng.integers(1, 4)):
                m[rng.integers(len(m))] ^= 1 << int(rng.integers(8))
        elif op == 1:
            m = m[:rng.integers(len(m))]
        else:
            m[rng.integers(len(m))] = int(rng.integers(256))
        try:
            out = gunzip_result(bytes(m)).output
        except InflateError:
            diagnosed += 1
            continue
        except Exception as e:  # anything else is a crash, not a diagnostic
            other.append(type(e).__name__)
            continue
        if out == data:
            untouched += 1
        else:
            wrong += 1
    ok = unverified == 0 and zlib_bad == 0 and wrong == 0 and not other
    verdict(2, "format conformance", ok,
            f"{len(allruns)} gzip outputs, {unverified} without verified CRC-32/ISIZE; "
            f"{zlib_n} zlib outputs, {zlib_bad} failing the check-bit identity or decode; "
            f"{mutations} mutated streams: {diagnosed} diagnosed, {untouched} decoded to the "
            f"original, {wrong} wrong outputs, {len(other)} crashes")


# ---------------------------------------------------------------- 3

def test_criterion_3_corpus_totals(corpus_runs):
    corpus, _ = corpus_runs
    parts = []
    ok = True
    for spec, cap in ((CANTERBURY, 690_000), (CALGARY, 1_004_000)):
        names = [k[1] for k in corpus if k[0] == spec.name]
        lc = sum(corpus[(spec.name, n)][1].out_size for n in names)
        gzip9 = REFERENCE_SIZES[spec.name]["gzip-9"]
        if len(names) < len(spec.members):
            ok = False
            ref = sum(len(zlib.compress((corpus_dir(spec) / n).read_bytes(), 9)) + 12 for n in names)
            parts.append(f"{spec.name}: only {len(names)}/{len(spec.members)} files present"
                         + (f", partial total {lc} B vs stdlib zlib-9 {ref} B" if names else ""))
        else:
            good = lc <= cap and lc < gzip9
            ok &= good
            parts.append(f"{spec.name}: total {lc} B (cap {cap}, recorded gzip-9 {gzip9})")
    e8 = present(ENWIK8)
    if e8:
        data = e8[0][1].read_bytes()[:10_000_000]
        size = len(compress_result(data, OPTIMAL).data)
        ratio = 100 * size / len(data)
        ok &= ratio <= 36.0
        parts.append(f"enwik8[0:10MB]: {ratio:.2f}% (cap 36%)")
    else:
        ok = False
        parts.append("enwik8: file not present")
    verdict(3, "corpus totals", ok, "; ".join(parts))


# ---------------------------------------------------------------- 4

def test_criterion_4_parse_optimality():
    budget = float(os.environ.get("GEFLOCHTENER_ORACLE_BUDGET", "120"))
    model = SymbolCostModel.fixed_huffman()
    tables = model.tables
    deadline = time.perf_counter() + budget
    mismatches = 0
    checked = 0
    complete_upto = -1
    for n in range(0, 33):
        for v in range(1 << n):
            data = bytes(97 + ((v >> k) & 1) for k in range(n))
            arr = np.frombuffer(data, dtype=np.uint8)
            if shortest_path_parse(data, costs=model).cost != min_parse_cost(arr, *tables):
                mismatches += 1
            checked += 1
            if time.perf_counter() > deadline:
                break
        else:
            complete_upto = n
            continue
        break

    rng = np.random.default_rng(11)
    rand_bad = 0
    for i in range(200):
        n = int(rng.integers(1, 65))
        data = make_input(rng, ("random", "text", "repetitive", "binary")[i % 4], n)
        arr = np.frombuffer(data, dtype=np.uint8)
        for m in (model, SymbolCostModel.from_stats(compute_stats(greedy_parse(data)))):
            if shortest_path_parse(data, costs=m).cost != min_parse_cost(arr, *m.tables):
                rand_bad += 1
    ok = complete_upto == 32 and mismatches == 0 and rand_bad == 0
    verdict(4, "parse optimality oracle", ok,
            f"binary strings exhaustive through length {complete_upto} of 32 required "
            f"({checked} strings in a {budget:.0f} s budget), {mismatches} mismatches; "
            f"200 random strings <= 64 B under two cost models, {rand_bad} mismatches")


# ---------------------------------------------------------------- 5

def test_criterion_5_dominance_and_monotonicity(corpus_runs, fuzz_runs):
    corpus, _ = corpus_runs
    runs, _ = fuzz_runs
    worse = [k[1] for k, (g, o) in corpus.items() if o.out_size > g.out_size]
    expected = len(CANTERBURY.members) + len(CALGARY.members)
    fuzz_worse = sum(o.out_size > g.out_size for _, g, o in runs)
    nonmono = 0
    histories = 0
    for name, path in present(CANTERBURY) + present(CALGARY):
        r = iterate_optimal(path.read_bytes()[:262144])
        histories += 1
        nonmono += any(b > a for a, b in zip(r.best_history, r.best_history[1:]))
    for data, _, _ in runs[:300]:
        r = iterate_optimal(data, max_iter=20)
        histories += 1
        nonmono += any(b > a for a, b in zip(r.best_history, r.best_history[1:]))
    ok = not worse and len(corpus) == expected and nonmono == 0 and fuzz_worse == 0
    verdict(5, "dominance and monotonicity", ok,
            f"{len(corpus)}/{expected} corpus files present, optimal larger than greedy on "
            f"{len(worse)} of them and on {fuzz_worse} fuzz inputs; {histories} iterate_optimal "
            f"runs, {nonmono} with a rising best-so-far cost")


# ---------------------------------------------------------------- 6

def test_criterion_6_formula_fidelity():
    from fractions import Fraction
    cp_bad = []
    flagged = []
    for corpus, sizes in REFERENCE_SIZES.items():
        lo = sizes["size"]
        for codec, lc in sizes.items():
            if codec == "size":
                continue
            q = Fraction(lo - lc, lo) * 100
            want = int(q * 100 + Fraction(1, 2)) / 100
            if compression_percentage(lo, lc) != want:
                cp_bad.append(f"{corpus}/{codec}")
        ours = compression_percentage(lo, sizes["geflochtener"])
        quoted = bench.QUOTED_CP[corpus]
        if f"{ours:.2f}" != f"{quoted:.2f}":
            flagged.append(f"{corpus} {ours:.2f} vs printed {quoted:g}")
    tt_bad = []
    worst = 0.0
    for corpus, times in REFERENCE_TIMES.items():
        for codec, ms in times.items():
            got = transmit_time_ms(REFERENCE_SIZES[corpus][codec], LINK_SPEEDS["paper"])
            err = abs(got - ms) / ms
            worst = max(worst, err)
            if err > 0.005:
                tt_bad.append(f"{corpus}/{codec}")
    ok = not cp_bad and not tt_bad
    verdict(6, "formula fidelity", ok,
            f"12 CP cells, {len(cp_bad)} off; flagged printed roundings: {', '.join(flagged) or 'none'}; "
            f"12 transmit cells at 10236 B/ms, worst error {100 * worst:.3f}% (limit 0.5%)")


# ---------------------------------------------------------------- 7

def test_criterion_7_match_finder_oracle():
    rng = np.random.default_rng(3)
    bad = 0
    positions = 0
    for i in range(1000):
        n = int(rng.integers(1, 257))
        data = make_input(rng, ("random", "text", "repetitive", "zeros", "binary")[i % 5], n)
        arr = np.frombuffer(data, dtype=np.uint8)
        st = MatchFinderState(data)
        for pos in range(n):
            positions += 1
            for tie, far in (("largest-distance", True), ("smallest-distance", False)):
                m = find_longest_match(st, pos, tie_break=tie)
                length, dist = longest_match_brute(arr, pos, 258, far)
                if m.length != length or m.dist != dist:
                    bad += 1
                elif length and data[pos:pos + length] != bytes(
                        data[pos - dist + k] for k in range(length)):
                    bad += 1
    verdict(7, "match-finder oracle", bad == 0,
            f"1000 inputs <= 256 B, {positions} positions x 2 tie-breaks, {bad} disagreements")


# ---------------------------------------------------------------- 8

def test_criterion_8_entropy_vectors(fuzz_runs, corpus_runs):
    runs, _ = fuzz_runs
    corpus, _ = corpus_runs
    crc_ok = crc32(b"123456789") == 0xCBF43926
    textbook = list(build_length_limited_huffman([45, 13, 12, 16, 9, 5]).code_lengths) == [1, 3, 3, 3, 4, 4]
    single = list(build_length_limited_huffman([0, 9, 0]).code_lengths) == [0, 1, 0]
    trees = 0
    bad = 0
    samples = [d for d, _, _ in runs[:600]]
    samples += [(corpus_dir(CANTERBURY if k[0] == "canterbury" else CALGARY) / k[1]).read_bytes()[:65536]
                for k in corpus]
    for data in samples:
        raw = compress_result(data, CompressConfig(format="raw", iterations=10)).data
        out, blocks = walk_blocks(raw)
        bad += out != data
        for btype, ll, dl in blocks:
            if btype != 2:
                continue
            for lengths in (ll, dl):
                trees += 1
                if sum(2.0 ** -x for x in lengths if x) != 1.0:
                    bad += 1
    ok = crc_ok and textbook and single and bad == 0 and trees > 0
    verdict(8, "entropy-coder vectors", ok,
            f"CRC-32 check value {'ok' if crc_ok else 'wrong'}; textbook lengths "
            f"{'ok' if textbook else 'wrong'}; single symbol {'ok' if single else 'wrong'}; "
            f"{trees} dynamic trees from {len(samples)} streams, {bad} violating Kraft equality")


# ---------------------------------------------------------------- 9

def adversarial_inputs():
    rng = np.random.default_rng(9)
    # every 1500-byte segment uses its own four-letter alphabet, so the
    # splitter wants far more than 100 blocks
    yield b"".join(rng.integers(4 * (k % 64), 4 * (k % 64) + 4, 1500, dtype=np.uint8).tobytes()
                   for k in range(300))
    yield b"".join(bytes([k % 2 * 255]) * 64 if k % 2 else rng.integers(0, 256, 64, dtype=np.uint8).tobytes()
                   for k in range(4000))
    yield b"".join(make_input(rng, ("text", "random")[k % 2], 300) for k in range(1500))
    yield b"".join(make_input(rng, ("zeros", "binary", "text", "random")[k % 4], 1000) for k in range(400))
    yield bytes(rng.integers(0, 256, 50_000, dtype=np.uint8)) * 3


def test_criterion_9_structural_caps(fuzz_runs, corpus_runs):
    runs, _ = fuzz_runs
    corpus, _ = corpus_runs
    max_blocks = 0
    for data in adversarial_inputs():
        for cfg in (GREEDY, CompressConfig.fast()):
            r = compress_result(data, cfg)
            assert decompress(r.data) == data
            max_blocks = max(max_blocks, r.blocks)
    stores = [r.store for _, g, o in runs for r in (g, o)] + [r.store for p in corpus.values() for r in p]
    max_dist = 0
    lens = [258, 3]
    tokens = 0
    for s in stores:
        m = s.dists > 0
        tokens += len(s)
        if m.any():
            max_dist = max(max_dist, int(s.dists[m].max()))
            lens = [min(lens[0], int(s.litlens[m].min())), max(lens[1], int(s.litlens[m].max()))]
    ok = max_blocks <= 100 and max_dist <= 32768 and 3 <= lens[0] and lens[1] <= 258
    verdict(9, "structural caps", ok,
            f"most blocks on alternating inputs {max_blocks} (cap 100); over {tokens} tokens "
            f"the largest distance is {max_dist}, match lengths span {lens[0]}..{lens[1]}")
