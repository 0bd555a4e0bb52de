"""Command line: compress, decompress, bench.

Exit status: 0 success, 2 I/O error, 3 corrupt stream, 4 corpus error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .block_splitter import MAX_BLOCKS
from .inflate import InflateError, decompress_result
from .match_finder import SCORE_POLICIES, TIE_BREAKS
from .pipeline import FAST_ITERATIONS, CompressConfig, compress_result

EXIT_OK = 0
EXIT_IO = 2
EXIT_CORRUPT = 3
EXIT_CORPUS = 4


def _err(msg: str) -> None:
    print(f"geflochtener: {msg}", file=sys.stderr)


def _read(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _write(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def cmd_compress(args) -> int:
    try:
        data = _read(args.input)
    except OSError as e:
        _err(f"cannot read {args.input}: {e.strerror or e}")
        return EXIT_IO
    cfg = CompressConfig(
        mode=args.mode, format=args.format,
        iterations=args.iterations if args.iterations is not None else (FAST_ITERATIONS if args.fast else 100),
        max_blocks=args.max_blocks, tie_break=args.tie_break, score_policy=args.score,
        preset="fast" if args.fast else "default")
    r = compress_result(data, cfg)
    try:
        _write(args.output, r.data)
    except OSError as e:
        _err(f"cannot write {args.output}: {e.strerror or e}")
        return EXIT_IO
    lo, lc = len(data), len(r.data)
    cp = f"{bench.compression_percentage(lo, lc):.2f}" if lo else "undefined (empty input)"
    stream = sys.stderr if args.output == "-" else sys.stdout
    print(f"LO={lo} LC={lc} CP={cp} blocks={r.blocks} iterations={sum(r.iterations)} "
          f"mode={cfg.mode} format={cfg.format}", file=stream)
    return EXIT_OK


def cmd_decompress(args) -> int:
    try:
        blob = _read(args.input)
    except OSError as e:
        _err(f"cannot read {args.input}: {e.strerror or e}")
        return EXIT_IO
    try:
        r = decompress_result(blob, args.format)
    except InflateError as e:
        _err(f"{args.input}: {type(e).__name__}: {e}")
        return EXIT_CORRUPT
    try:
        _write(args.output, r.output)
    except OSError as e:
        _err(f"cannot write {args.output}: {e.strerror or e}")
        return EXIT_IO
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        if args.manifest:
            spec = bench.CorpusSpec.load(args.manifest)
        elif args.corpus in bench.CORPORA:
            spec = bench.CORPORA[args.corpus]
        else:
            _err(f"unknown corpus {args.corpus!r}; choose from {', '.join(bench.CORPORA)}")
            return EXIT_CORPUS
        if args.fetch:
            bench.fetch_corpus(spec, args.corpus_dir and Path(args.corpus_dir) / spec.name)
    except bench.CorpusError as e:
        _err(str(e))
        return EXIT_CORPUS
    spec = spec.with_prefix(args.prefix)
    codecs = [c for c in args.codec.split(",") if c] if args.codec else []
    directory = Path(args.corpus_dir) / spec.name if args.corpus_dir else None
    try:
        report = bench.run_corpus(spec, codecs, args.link_speed, None, directory, args.jobs, args.fast)
    except ValueError as e:
        _err(str(e))
        return EXIT_CORPUS
    try:
        if args.csv == "-":
            sys.stdout.write(report.to_csv())
        else:
            Path(args.csv).write_text(report.to_csv())
    except OSError as e:
        _err(f"cannot write {args.csv}: {e.strerror or e}")
        return EXIT_IO
    print(report.summary(), file=sys.stderr if args.csv == "-" else sys.stdout)
    return EXIT_OK if report.ok else EXIT_CORPUS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geflochtener", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="compress a file ('-' for stdin/stdout)")
    c.add_argument("--mode", choices=("greedy", "optimal"), default="optimal")
    c.add_argument("--format", choices=("gzip", "zlib", "raw"), default="gzip")
    c.add_argument("--iterations", type=int, default=None, help="optimal-parse rounds (default 100)")
    c.add_argument("--max-blocks", type=int, default=MAX_BLOCKS)
    c.add_argument("--tie-break", choices=TIE_BREAKS, default="largest-distance")
    c.add_argument("--score", choices=SCORE_POLICIES, default="identity")
    c.add_argument("--fast", action="store_true", help=f"{FAST_ITERATIONS} iterations")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("input")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="decode a gzip or zlib file")
    d.add_argument("--format", choices=("gzip", "zlib", "raw"), default=None,
                   help="container (default: detect gzip/zlib)")
    d.add_argument("-o", "--output", required=True)
    d.add_argument("input")
    d.set_defaults(func=cmd_decompress)

    b = sub.add_parser("bench", help="benchmark codecs over a corpus")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--corpus", help=f"one of {', '.join(bench.CORPORA)}")
    g.add_argument("--manifest", help="JSON manifest with member names and sizes")
    b.add_argument("--codec", default="geflochtener-greedy,geflochtener-optimal",
                   help=f"comma list from {', '.join(bench.CODECS)}")
    b.add_argument("--link-speed", default="paper", help="paper, 10MBps or bytes per ms")
    b.add_argument("--prefix", type=int, default=None, help="only the first BYTES of each file")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--fast", action="store_true")
    b.add_argument("--corpus-dir", default=None, help="root holding one directory per corpus")
    b.add_argument("--fetch", action="store_true", help="download the corpus first")
    b.add_argument("--csv", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        _err(str(e))
        return EXIT_IO if args.command != "bench" else EXIT_CORPUS


if __name__ == "__main__":
    sys.exit(main())
