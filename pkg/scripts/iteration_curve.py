"""Encoded size per optimal-parse iteration for one file, as CSV.

    python scripts/iteration_curve.py FILE [--max-iter 100] [--patience 100]
"""

import argparse
import csv
import sys
from pathlib import Path

from geflochtener.parsers import iterate_optimal


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("file")
    ap.add_argument("--max-iter", type=int, default=100)
    ap.add_argument("--patience", type=int, default=100, help="set high to see the whole curve")
    ap.add_argument("--perturb-seed", type=int, default=None)
    ap.add_argument("--limit", type=int, default=1 << 20, help="bytes of the file to parse")
    args = ap.parse_args(argv)

    data = Path(args.file).read_bytes()[:args.limit]
    r = iterate_optimal(data, max_iter=args.max_iter, patience=args.patience,
                        perturb_seed=args.perturb_seed)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["iteration", "bits", "best_bits"])
    for i, (b, best) in enumerate(zip(r.history, r.best_history)):
        w.writerow([i, b, best])
    gain = 100 * (r.history[0] - r.bits) / r.history[0] if r.history[0] else 0.0
    print(f"# greedy {r.history[0]} bits, best {r.bits} bits ({gain:.2f}% smaller) "
          f"after {r.iterations} iterations", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
