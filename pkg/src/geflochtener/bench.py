"""Corpus benchmark: compression percentage, transmission time, CSV reports.

Reference figures for gzip-9, 7-Zip, KZIP and the original Geflochtener
implementation are embedded as recorded constants; no third-party
compressor is ever run.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import shutil
import tarfile
import tempfile
import time
import urllib.request
import warnings
import zipfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import baselines
from .inflate import gunzip
from .pipeline import CompressConfig, compress

CSV_COLUMNS = ("corpus", "file", "codec", "LO", "LC", "CP", "transmit_ms", "wall_ms")

LINK_SPEEDS = {
    "paper": 10236,  # bytes/ms implied by the published transmission times
    "10MBps": 10000,
}

# recorded totals in bytes: corpus size, then compressed size per compressor
REFERENCE_SIZES = {
    "calgary": {"size": 3141622, "gzip-9": 1017624, "7zip": 980674, "kzip": 978993, "geflochtener": 974067},
    "canterbury": {"size": 2818976, "gzip-9": 730732, "7zip": 675163, "kzip": 674321, "geflochtener": 668456},
    "enwik8": {"size": 100000000, "gzip-9": 36445248, "7zip": 35102976, "kzip": 35025767,
               "geflochtener": 34986660},
}

# recorded transmission times in ms
REFERENCE_TIMES = {
    "calgary": {"gzip-9": 99.4, "7zip": 95.8, "kzip": 95.6, "geflochtener": 95.2},
    "canterbury": {"gzip-9": 71.4, "7zip": 65.9, "kzip": 65.9, "geflochtener": 65.3},
    "enwik8": {"gzip-9": 3559.1, "7zip": 3428.0, "kzip": 3420.5, "geflochtener": 3417.6},
}

# percentages quoted in prose next to the tables
QUOTED_CP = {"calgary": 69.0, "canterbury": 76.22, "enwik8": 65.0}


class UndefinedInputError(ValueError):
    pass


class CorpusError(RuntimeError):
    pass


# ---------------------------------------------------------------- formulas

def _round_half_up(q: Fraction, places: int) -> float:
    scale = 10 ** places
    sign = -1 if q < 0 else 1
    return sign * math.floor(abs(q) * scale + Fraction(1, 2)) / scale


def compression_percentage_exact(lo: int, lc: int) -> Fraction:
    if lo <= 0:
        raise UndefinedInputError("compression percentage is undefined for an empty original")
    if lc > lo:
        warnings.warn(f"compressed size {lc} exceeds original {lo}; percentage is negative", stacklevel=2)
    return Fraction(lo - lc, lo) * 100


def compression_percentage(lo: int, lc: int) -> float:
    """(LO - LC) / LO * 100, computed exactly and rounded half-up to 2 places."""
    return _round_half_up(compression_percentage_exact(lo, lc), 2)


def redundancy_rate(cp: float) -> float:
    """100 minus the compressed ratio, which is the compression percentage
    itself; kept separate to mirror how results are usually framed."""
    return 100 - (100 - cp)


def resolve_link_speed(speed) -> float:
    if isinstance(speed, str):
        if speed in LINK_SPEEDS:
            return float(LINK_SPEEDS[speed])
        speed = float(speed)
    if speed <= 0:
        raise ValueError("link speed must be positive")
    return float(speed)


def transmit_time_ms(size: int, link_speed=LINK_SPEEDS["paper"]) -> float:
    """Modeled transfer time: size / speed (bytes per millisecond), 1 decimal."""
    return _round_half_up(Fraction(size) / Fraction(resolve_link_speed(speed=link_speed)), 1)


# ---------------------------------------------------------------- corpora

@dataclass(frozen=True)
class CorpusSpec:
    name: str
    members: tuple[tuple[str, int], ...]
    source_url: str = ""
    prefix_limit: int | None = None
    recorded_total: int | None = None  # total as published, when it differs from the member sum

    @property
    def total_size(self) -> int:
        return sum(size for _, size in self.members)

    @property
    def label(self) -> str:
        if self.prefix_limit is None:
            return self.name
        p = self.prefix_limit
        unit = f"{p // 1_000_000}MB" if p % 1_000_000 == 0 else f"{p}B"
        return f"{self.name}[0:{unit}]"

    def with_prefix(self, prefix: int | None) -> CorpusSpec:
        return CorpusSpec(self.name, self.members, self.source_url, prefix, self.recorded_total)

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "source_url": self.source_url,
                           "members": [{"name": n, "size": s} for n, s in self.members],
                           "recorded_total": self.recorded_total}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> CorpusSpec:
        d = json.loads(text)
        try:
            members = tuple((m["name"], int(m["size"])) for m in d["members"])
            return cls(d["name"], members, d.get("source_url", ""), d.get("prefix_limit"),
                       d.get("recorded_total"))
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusError(f"malformed manifest: {e}") from e

    @classmethod
    def load(cls, path) -> CorpusSpec:
        try:
            return cls.from_json(Path(path).read_text())
        except OSError as e:
            raise CorpusError(f"cannot read manifest {path}: {e}") from e


CANTERBURY = CorpusSpec("canterbury", (
    ("alice29.txt", 152089), ("asyoulik.txt", 125179), ("cp.html", 24603), ("fields.c", 11150),
    ("grammar.lsp", 3721), ("kennedy.xls", 1029744), ("lcet10.txt", 426754), ("plrabn12.txt", 481861),
    ("ptt5", 513216), ("sum", 38240), ("xargs.1", 4227),
), "https://corpus.canterbury.ac.nz/resources/cantrbry.tar.gz", recorded_total=2818976)

CALGARY = CorpusSpec("calgary", (
    ("bib", 111261), ("book1", 768771), ("book2", 610856), ("geo", 102400), ("news", 377109),
    ("obj1", 21504), ("obj2", 246814), ("paper1", 53161), ("paper2", 82199), ("pic", 513216),
    ("progc", 39611), ("progl", 71646), ("progp", 49379), ("trans", 93695),
), "https://corpus.canterbury.ac.nz/resources/calgary.tar.gz")

ENWIK8 = CorpusSpec("enwik8", (("enwik8", 100_000_000),), "http://mattmahoney.net/dc/enwik8.zip")

CORPORA = {c.name: c for c in (CANTERBURY, CALGARY, ENWIK8)}


def default_corpus_root() -> Path:
    env = os.environ.get("GEFLOCHTENER_CORPUS_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "corpora"


def corpus_dir(spec: CorpusSpec, root=None) -> Path:
    return Path(root or default_corpus_root()) / spec.name


def check_corpus(spec: CorpusSpec, directory) -> list[str]:
    """Diagnostics for members that are missing or have the wrong size."""
    problems = []
    for name, size in spec.members:
        p = Path(directory) / name
        if not p.is_file():
            problems.append(f"{spec.name}/{name}: missing")
        elif p.stat().st_size != size:
            problems.append(f"{spec.name}/{name}: {p.stat().st_size} bytes, manifest says {size}")
    return problems


def fetch_corpus(spec: CorpusSpec, dest=None, url: str | None = None) -> Path:
    """Download and unpack a corpus archive, keeping only manifest members,
    then verify every member's size."""
    url = url or spec.source_url
    if not url:
        raise CorpusError(f"no source URL for corpus {spec.name}")
    out = Path(dest) if dest else corpus_dir(spec)
    out.mkdir(parents=True, exist_ok=True)
    wanted = {name for name, _ in spec.members}
    with tempfile.TemporaryDirectory() as tmp:
        archive = Path(tmp) / url.rsplit("/", 1)[-1]
        try:
            with urllib.request.urlopen(url, timeout=60) as r, open(archive, "wb") as f:
                shutil.copyfileobj(r, f)
        except OSError as e:
            raise CorpusError(f"download of {url} failed: {e}") from e
        if zipfile.is_zipfile(archive):
            with zipfile.ZipFile(archive) as z:
                for info in z.infolist():
                    base = Path(info.filename).name
                    if base in wanted:
                        (out / base).write_bytes(z.read(info))
        else:
            with tarfile.open(archive) as t:
                for m in t.getmembers():
                    base = Path(m.name).name
                    if m.isfile() and base in wanted:
                        (out / base).write_bytes(t.extractfile(m).read())
    problems = check_corpus(spec, out)
    if problems:
        raise CorpusError("; ".join(problems))
    return out


# ---------------------------------------------------------------- codecs

def _geflochtener(mode):
    def run(data: bytes, fast: bool = False) -> bytes:
        cfg = CompressConfig.fast(mode=mode) if fast else CompressConfig(mode=mode)
        out = compress(data, cfg)
        if gunzip(out) != data:
            raise AssertionError("round trip failed")
        return out
    return run


def _baseline(enc, dec):
    def run(data: bytes, fast: bool = False) -> bytes:
        out = enc(data)
        if dec(out) != data:
            raise AssertionError("round trip failed")
        return out
    return run


CODECS = {
    "lz77": _baseline(baselines.lz77_compress, baselines.lz77_decompress),
    "lzss": _baseline(baselines.lzss_compress, baselines.lzss_decompress),
    "geflochtener-greedy": _geflochtener("greedy"),
    "geflochtener-optimal": _geflochtener("optimal"),
}


def codec_label(codec: str, fast: bool) -> str:
    return f"{codec}[fast]" if fast and codec == "geflochtener-optimal" else codec


# ---------------------------------------------------------------- reports

@dataclass
class BenchRow:
    corpus: str
    file: str
    codec: str
    lo: int | None
    lc: int | None
    cp: float | None
    transmit_ms: float | None
    wall_ms: float | None = None

    @property
    def redundancy_removed(self) -> float | None:
        return None if self.cp is None else redundancy_rate(self.cp)

    def csv_fields(self) -> list[str]:
        def f(v, fmt):
            return "" if v is None else format(v, fmt)
        return [self.corpus, self.file, self.codec, f(self.lo, "d"), f(self.lc, "d"),
                f(self.cp, ".2f"), f(self.transmit_ms, ".1f"), f(self.wall_ms, ".1f")]


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def totals(self, corpus: str) -> dict[str, BenchRow]:
        return {r.codec: r for r in self.rows
                if r.corpus == corpus and r.file.startswith("TOTAL")}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{'corpus':<16} {'file':<18} {'codec':<28} {'LO':>10} {'LC':>10} {'CP%':>7} {'ms':>9}"]
        for r in self.rows:
            c = r.csv_fields()
            lines.append(f"{c[0]:<16} {c[1]:<18} {c[2]:<28} {c[3]:>10} {c[4]:>10} {c[5]:>7} {c[6]:>9}")
        lines += [f"! {d}" for d in self.diagnostics]
        return "\n".join(lines)


def _row(corpus, file, codec, lo, lc, speed, wall=None):
    cp = compression_percentage(lo, lc) if lo else None
    return BenchRow(corpus, file, codec, lo, lc, cp, transmit_time_ms(lc, speed), wall)


def _job(args):
    path, prefix, codec, fast = args
    data = Path(path).read_bytes()
    if prefix is not None:
        data = data[:prefix]
    t = time.perf_counter()
    out = CODECS[codec](data, fast)
    return len(data), len(out), (time.perf_counter() - t) * 1000


def reference_rows(spec: CorpusSpec, link_speed) -> list[BenchRow]:
    ref = REFERENCE_SIZES.get(spec.name)
    if ref is None or spec.prefix_limit is not None:
        return []
    return [_row(spec.name, "TOTAL", f"recorded:{k}", ref["size"], v, link_speed)
            for k, v in ref.items() if k != "size"]


def run_corpus(spec: CorpusSpec, codecs, link_speed="paper", output=None, directory=None,
               jobs: int = 1, fast: bool = False, include_reference: bool = True) -> BenchReport:
    """Compress every member with every codec; one row per (file, codec),
    a totals row per codec, and the recorded reference totals."""
    codecs = list(codecs)
    for c in codecs:
        if c not in CODECS:
            raise ValueError(f"unknown codec {c!r}; choose from {', '.join(CODECS)}")
    speed = resolve_link_speed(link_speed)
    directory = Path(directory) if directory else corpus_dir(spec)
    report = BenchReport()
    report.diagnostics = check_corpus(spec, directory)
    bad = {d.split(":")[0].split("/", 1)[1] for d in report.diagnostics}
    present = [name for name, _ in spec.members if name not in bad]
    tasks = [(str(directory / name), spec.prefix_limit, c, fast) for name in present for c in codecs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    label = spec.label
    sums = {c: [0, 0, 0.0] for c in codecs}
    for (path, _, c, _), (lo, lc, wall) in zip(tasks, results):
        report.rows.append(_row(label, Path(path).name, codec_label(c, fast), lo, lc, speed, wall))
        s = sums[c]
        s[0] += lo
        s[1] += lc
        s[2] += wall
    if codecs:
        total = "TOTAL" if len(present) == len(spec.members) else f"TOTAL(partial {len(present)}/{len(spec.members)})"
        for c in codecs:
            lo, lc, wall = sums[c]
            if lo:
                report.rows.append(_row(label, total, codec_label(c, fast), lo, lc, speed, wall))
        if include_reference:
            report.rows += reference_rows(spec, speed)
    if output is not None:
        Path(output).write_text(report.to_csv())
    return report
