"""Run the identifier-building pipeline offline with the reference provider.

Failure modes can be injected per target to watch the repair loop and the
accepted/cautious/empty assembly rules, e.g. ``--fail CM=fix_on_repair``.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from analogid.benchmark import load_demo_corpus
from analogid.pipeline import (Demo, PipelineConfig, ReferenceProvider, format_retry_summary,
                               format_status_histogram, identify_with_codebase, retry_summary, run_pipeline)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--targets", default="HL1,CM,DiffPair,Inverter,HL3")
    ap.add_argument("--fail", action="append", default=[], metavar="TARGET=MODE",
                    help=f"one of {', '.join(ReferenceProvider.MODES)}")
    ap.add_argument("--retry-limit", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, help="save codebase and run log here")
    args = ap.parse_args()

    failures = dict(item.split("=", 1) for item in args.fail)
    entries = load_demo_corpus()
    demos = [Demo(e.id, e.netlist, e.truth) for e in entries]
    provider = ReferenceProvider(failures)
    config = PipelineConfig(demos=demos, provider=provider, retry_limit=args.retry_limit, seed=args.seed,
                            workers=args.workers)

    start = time.perf_counter()
    codebase, log = run_pipeline(config, args.targets.split(","))
    elapsed = time.perf_counter() - start
    for name, entry in codebase.entries.items():
        print(f"{name:<10}{entry.kind:<10}retries={entry.retries} calls={log.calls(name)}")
    print(f"\n{format_retry_summary(retry_summary(codebase, args.retry_limit))}\n")
    print(format_status_histogram(log))
    print(f"\n{provider.calls} provider calls, {elapsed:.2f} s")

    calls = provider.calls
    for e in entries:
        found, failed = identify_with_codebase(codebase, e.netlist)
        print(f"{e.id}: {sum(1 for _ in found)} instances, {len(failed)} script failures")
    assert provider.calls == calls, "inference must not call the provider"
    if args.out:
        codebase.save(args.out / "codebase")
        log.write(args.out / "runlog.jsonl")


if __name__ == "__main__":
    main()
