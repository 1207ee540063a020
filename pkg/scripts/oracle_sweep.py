"""Compare the current-mirror detector with the exhaustive oracle on random netlists."""
from __future__ import annotations

import argparse
import time

from analogid.detectors import brute_force_cm_oracle, detect_current_mirrors
from analogid.netlist import serialize_netlist
from analogid.synth import random_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--max-devices", type=int, default=14)
    args = ap.parse_args()

    start = time.perf_counter()
    corpus = random_corpus(args.seed, args.count, args.max_devices)
    mismatches = mirrors = 0
    for i, net in enumerate(corpus):
        fast = {m.components for m in detect_current_mirrors(net)}
        slow = {m.components for m in brute_force_cm_oracle(net)}
        mirrors += len(fast)
        if fast != slow:
            mismatches += 1
            print(f"netlist {i}: detector {sorted(map(sorted, fast))} oracle {sorted(map(sorted, slow))}")
            print(serialize_netlist(net))
    elapsed = time.perf_counter() - start
    print(f"{args.count} netlists, {mirrors} mirrors, {mismatches} mismatches, {elapsed:.1f} s")


if __name__ == "__main__":
    main()
