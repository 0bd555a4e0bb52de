"""Compress the benchmark corpora and compare totals with the recorded ones.

    python scripts/reproduce_totals.py [--corpus-dir DIR] [--fast] [--enwik8-prefix BYTES]
"""

import argparse
import sys

from geflochtener import bench

TARGETS = {"canterbury": 690_000, "calgary": 1_004_000}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus-dir", default=None)
    ap.add_argument("--fast", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--enwik8-prefix", type=int, default=10_000_000,
                    help="0 runs the full 100 MB file (hours)")
    ap.add_argument("--csv", default="totals.csv")
    args = ap.parse_args(argv)

    rows = []
    status = 0
    for spec in (bench.CANTERBURY, bench.CALGARY, bench.ENWIK8):
        if spec is bench.ENWIK8 and args.enwik8_prefix:
            spec = spec.with_prefix(args.enwik8_prefix)
        directory = bench.corpus_dir(spec, args.corpus_dir)
        report = bench.run_corpus(spec, ["geflochtener-greedy", "geflochtener-optimal"],
                                  directory=directory, jobs=args.jobs, fast=args.fast)
        rows += report.rows
        for d in report.diagnostics:
            print(f"! {d}", file=sys.stderr)
            status = 1
        for codec, row in report.totals(spec.label).items():
            if codec.startswith("recorded:"):
                continue
            line = f"{spec.label:<16} {codec:<28} LC={row.lc:>11} CP={row.cp:.2f}"
            cap = TARGETS.get(spec.name)
            if cap and row.file == "TOTAL" and codec.startswith("geflochtener-optimal"):
                gz = bench.REFERENCE_SIZES[spec.name]["gzip-9"]
                line += f"  target <= {cap} and < {gz}: {'met' if row.lc <= cap and row.lc < gz else 'missed'}"
            if spec.prefix_limit and codec.startswith("geflochtener-optimal"):
                line += f"  ratio {100 * row.lc / row.lo:.2f}% (target <= 36%)"
            print(line)
    out = bench.BenchReport(rows)
    with open(args.csv, "w") as f:
        f.write(out.to_csv())
    print(f"wrote {args.csv}")
    return status


if __name__ == "__main__":
    sys.exit(main())
