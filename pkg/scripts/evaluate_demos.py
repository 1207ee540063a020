"""Score the rule-based detectors on the bundled demonstration corpus."""
from __future__ import annotations

import argparse
import json

from analogid.annotations import LEVELS
from analogid.benchmark import load_demo_corpus
from analogid.detectors import identify
from analogid.metrics import evaluate_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true", help="print the full report as JSON")
    ap.add_argument("--confusion", action="store_true", help="print per-level confusion matrices")
    args = ap.parse_args()

    entries = load_demo_corpus()
    items = [(e.id, identify(e.netlist), e.truth, [d.name for d in e.netlist]) for e in entries]
    report = evaluate_corpus(items, LEVELS)
    if args.json:
        print(json.dumps(report.to_json(), indent=1))
        return
    print(report.format_table())
    if args.confusion:
        for level, rep in report.levels.items():
            print(f"\n{level}\n{rep.confusion.format()}")


if __name__ == "__main__":
    main()
