"""Compare shortest_path_parse with the brute-force minimum on every binary
string up to a given length.

The full check to length 32 covers about 8.6e9 strings and takes days on a
single core, so the work can be sharded and resumed:

    python scripts/exhaustive_parse_oracle.py --max-len 32 --shard 3 --shards 16 \\
        --state shard3.json
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from geflochtener.parsers import SymbolCostModel, shortest_path_parse  # noqa: E402
from oracles import min_parse_cost  # noqa: E402


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-len", type=int, default=32)
    ap.add_argument("--min-len", type=int, default=0)
    ap.add_argument("--shard", type=int, default=0)
    ap.add_argument("--shards", type=int, default=1)
    ap.add_argument("--state", default=None, help="JSON checkpoint to resume from")
    args = ap.parse_args(argv)

    model = SymbolCostModel.fixed_huffman()
    tables = model.tables
    state = {"length": args.min_len, "next": args.shard, "checked": 0, "mismatches": []}
    if args.state and Path(args.state).exists():
        state = json.loads(Path(args.state).read_text())
    last_save = time.time()
    while state["length"] <= args.max_len:
        n = state["length"]
        v = state["next"]
        while v < (1 << n):
            data = bytes(97 + ((v >> k) & 1) for k in range(n))
            arr = np.frombuffer(data, dtype=np.uint8)
            if shortest_path_parse(data, costs=model).cost != min_parse_cost(arr, *tables):
                state["mismatches"].append(data.decode())
                print(f"mismatch: {data.decode()}", flush=True)
            state["checked"] += 1
            v += args.shards
            if args.state and time.time() - last_save > 30:
                state["next"] = v
                Path(args.state).write_text(json.dumps(state))
                last_save = time.time()
        print(f"length {n} done, {state['checked']} strings checked, "
              f"{len(state['mismatches'])} mismatches", flush=True)
        state["length"] = n + 1
        state["next"] = args.shard
    if args.state:
        Path(args.state).write_text(json.dumps(state))
    return 1 if state["mismatches"] else 0


if __name__ == "__main__":
    sys.exit(main())
