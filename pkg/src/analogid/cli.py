"""Command-line front end.

Exit codes: 0 success, 2 netlist or annotation parse error, 3 corpus
mismatch, 4 provider or configuration failure, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .annotations import LEVELS, AnnotationError, AnnotationSet, dump_level, normalize_level
from .benchmark import (LEVEL_SUFFIX, CorpusMismatch, EmptyCorpus, canonicalize, corpus_ids, corpus_stats,
                        demo_corpus_dir, load_corpus, load_entry, load_labels, merge_shared_diode_cms)
from .detectors import identify
from .fileio import atomic_write
from .metrics import evaluate_corpus
from .netlist import DEFAULT_RESERVED, NetlistError, anonymize, classify_nets, parse_netlist, serialize_netlist

EXIT_OK, EXIT_OTHER, EXIT_PARSE, EXIT_MISMATCH, EXIT_PROVIDER = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_OTHER):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_OTHER, f"{self.prog}: error: {message}\n")


def _levels(text: str) -> list[str]:
    out = []
    for part in text.split(","):
        lvl = normalize_level(part.strip())
        if lvl not in LEVELS:
            raise argparse.ArgumentTypeError(f"unknown level {part!r}; use hl1, hl2, hl3")
        out.append(lvl)
    return list(dict.fromkeys(out))


def _csv(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _netlist_paths(paths: Sequence[str]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.sp")))
        elif p.exists():
            out.append(p)
        else:
            raise CliError(f"{p}: no such file or directory")
    if not out:
        raise CliError("no netlists given")
    return out


def _read_netlist(path: Path):
    try:
        return parse_netlist(path.read_text())
    except NetlistError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _map(workers: int, fn, items):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_levels(ann: AnnotationSet, out_dir: Path, stem: str, levels: Sequence[str]) -> None:
    for lvl in levels:
        atomic_write(out_dir / f"{stem}{LEVEL_SUFFIX[lvl]}", dump_level(ann, lvl) + "\n")


def cmd_identify(args) -> int:
    roles_override = json.loads(args.roles) if args.roles else None
    paths = _netlist_paths(args.netlists)
    netlists = [(p, _read_netlist(p)) for p in paths]

    def run(item):
        path, netlist = item
        try:
            roles = classify_nets(netlist, roles_override)
        except NetlistError as exc:
            raise CliError(f"{path}: {exc}") from None
        return path, identify(netlist, roles, args.levels)

    results = _map(args.workers, run, netlists)
    if args.out:
        for path, ann in results:
            _write_levels(ann, Path(args.out), path.stem, args.levels)
    else:
        for path, ann in results:
            doc = {lvl: json.loads(dump_level(ann, lvl)) for lvl in args.levels}
            print(json.dumps({path.stem: doc} if len(results) > 1 else doc, indent=1))
    return EXIT_OK


def _read_annotations(directory: Path, ids: Sequence[str], level: str) -> dict[str, AnnotationSet]:
    out = {}
    for i in ids:
        path = directory / f"{i}{LEVEL_SUFFIX[level]}"
        try:
            out[i] = canonicalize(load_labels(path.read_text(), level))
        except AnnotationError as exc:
            raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    return out


def cmd_evaluate(args) -> int:
    pred_dir, truth_dir = Path(args.pred_dir), Path(args.truth_dir)
    for d in (pred_dir, truth_dir):
        if not d.is_dir():
            raise CliError(f"{d}: not a directory")
    preds: dict[str, AnnotationSet] = {}
    truths: dict[str, AnnotationSet] = {}
    ids: list[str] = []
    for lvl in args.levels:
        suffix = LEVEL_SUFFIX[lvl]
        pred_ids = {p.name[: -len(suffix)] for p in pred_dir.glob(f"*{suffix}")}
        truth_ids = {p.name[: -len(suffix)] for p in truth_dir.glob(f"*{suffix}")}
        orphans = [f"{i}{suffix} (prediction only)" for i in pred_ids - truth_ids]
        orphans += [f"{i}{suffix} (ground truth only)" for i in truth_ids - pred_ids]
        if orphans:
            raise CliError(str(CorpusMismatch(orphans)), EXIT_MISMATCH)
        ids = sorted(truth_ids | set(ids))
        for i, ann in _read_annotations(pred_dir, sorted(pred_ids), lvl).items():
            preds[i] = preds.get(i, AnnotationSet()).union(ann)
        for i, ann in _read_annotations(truth_dir, sorted(truth_ids), lvl).items():
            truths[i] = truths.get(i, AnnotationSet()).union(ann)
    if not ids:
        raise CliError(str(EmptyCorpus(f"no annotation files for {', '.join(args.levels)}")), EXIT_MISMATCH)

    def universe(i):
        sp = truth_dir / f"{i}.sp"
        return {d.name for d in _read_netlist(sp)} if sp.exists() else None

    items = [(i, preds.get(i, AnnotationSet()), truths.get(i, AnnotationSet()), universe(i)) for i in ids]
    report = evaluate_corpus(items, args.levels)
    print(report.format_table())
    if args.out:
        atomic_write(args.out, json.dumps(report.to_json(), indent=1) + "\n")
    return EXIT_OK


def cmd_prepare(args) -> int:
    src, dst = Path(args.corpus), Path(args.out)
    ids = corpus_ids(src)
    if not ids:
        raise CliError(f"{src}: no .sp netlists")
    reserved = set(args.reserved_nets) if args.reserved_nets is not None else DEFAULT_RESERVED

    def prep(i):
        try:
            entry = load_entry(src, i)
        except NetlistError as exc:
            raise CliError(f"{src / i}.sp: {exc}", EXIT_PARSE) from None
        except AnnotationError as exc:
            raise CliError(f"{src / i}: {exc}", EXIT_PARSE) from None
        netlist, _ = anonymize(entry.netlist, reserved)
        truth = merge_shared_diode_cms(canonicalize(entry.truth), netlist)
        atomic_write(dst / f"{i}.sp", serialize_netlist(netlist))
        _write_levels(truth, dst, i, [l for l in LEVELS if (src / f"{i}{LEVEL_SUFFIX[l]}").exists()])
        return i, {"bucket": entry.size_bucket, "transistors": entry.transistor_count,
                   "warnings": entry.warnings}

    index = dict(_map(args.workers, prep, ids))
    atomic_write(dst / "index.json", json.dumps(index, indent=1, sort_keys=True) + "\n")
    for i, info in index.items():
        for w in info["warnings"]:
            print(f"warning: {i}: {w}", file=sys.stderr)
    print(f"prepared {len(index)} netlists into {dst}")
    return EXIT_OK


def cmd_stats(args) -> int:
    directory = Path(args.corpus) if args.corpus else demo_corpus_dir()
    try:
        entries = load_corpus(directory)
    except NetlistError as exc:
        raise CliError(f"{directory}: {exc}", EXIT_PARSE) from None
    except AnnotationError as exc:
        raise CliError(f"{directory}: {exc}", EXIT_PARSE) from None
    if not entries:
        raise CliError(f"{directory}: no .sp netlists")
    entries = [replace(e, truth=canonicalize(e.truth)) for e in entries]
    report = corpus_stats(entries).format()
    print(report)
    if args.out:
        atomic_write(args.out, report + "\n")
    return EXIT_OK


def _load_pipeline_config(args):
    from .pipeline import Demo, PipelineConfig

    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"{args.config}: {exc}", EXIT_PROVIDER) from None
    demo_dir = Path(raw.get("demos") or demo_corpus_dir())
    try:
        entries = load_corpus(demo_dir)
    except (NetlistError, AnnotationError) as exc:
        raise CliError(f"{demo_dir}: {exc}", EXIT_PARSE) from None
    if not entries:
        raise CliError(f"{demo_dir}: no demonstrations", EXIT_PROVIDER)
    demos = [Demo(e.id, e.netlist, canonicalize(e.truth)) for e in entries]
    try:
        return PipelineConfig(
            demos=demos,
            provider=raw.get("provider", {"kind": "reference"}),
            retry_limit=int(raw.get("retry_limit", 5)),
            timeout=float(args.timeout if args.timeout is not None else raw.get("timeout", 30.0)),
            seed=int(args.seed if args.seed is not None else raw.get("seed", 0)),
            interpreter=tuple(raw.get("interpreter") or (sys.executable, "{script}")),
            workers=int(args.workers if args.workers is not None else raw.get("workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad pipeline config: {exc}", EXIT_PROVIDER) from None


def cmd_pipeline(args) -> int:
    from .pipeline import (ConfigError, format_retry_summary, format_status_histogram, retry_summary,
                           run_pipeline)

    config = _load_pipeline_config(args)
    out = Path(args.out)
    try:
        codebase, log = run_pipeline(config, args.targets)
    except (ConfigError, ValueError, KeyError) as exc:
        raise CliError(f"pipeline setup failed: {exc}", EXIT_PROVIDER) from None
    codebase.save(out / "codebase")
    log.write(out / "runlog.jsonl")
    summary = format_retry_summary(retry_summary(codebase, config.retry_limit))
    histogram = format_status_histogram(log)
    kinds = "\n".join(f"{name} {entry.kind}" for name, entry in codebase.entries.items())
    atomic_write(out / "summary.txt", f"{kinds}\n\n{summary}\n\n{histogram}\n")
    print(kinds, summary, histogram, sep="\n\n")
    provider_failures = [e for e in codebase.entries.values() if e.error.startswith("ProviderError")]
    for e in provider_failures:
        print(f"error: {e.target}: {e.error}", file=sys.stderr)
    return EXIT_PROVIDER if provider_failures else EXIT_OK


def cmd_infer(args) -> int:
    from .pipeline import Codebase, identify_with_codebase

    try:
        codebase = Codebase.load(args.codebase)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise CliError(f"{args.codebase}: cannot load codebase: {exc}", EXIT_PROVIDER) from None
    netlists = [(p, _read_netlist(p)) for p in _netlist_paths(args.netlists)]
    timeout = args.timeout if args.timeout is not None else 30.0

    def run(item):
        path, netlist = item
        ann, failures = identify_with_codebase(codebase, netlist, timeout=timeout)
        return path, ann, failures

    out = Path(args.out)
    failed = 0
    for path, ann, failures in _map(args.workers or 1, run, netlists):
        _write_levels(ann, out, path.stem, args.levels)
        for f in failures:
            failed += 1
            print(f"warning: {path.stem}: {f.target} {f.result.status}", file=sys.stderr)
    print(f"labelled {len(netlists)} netlists into {out} ({failed} script failures)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="analogid", description="Identify analog subcircuits in flat SPICE netlists.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    all_levels = ",".join(l.lower() for l in LEVELS)

    p = sub.add_parser("identify", help="run the rule-based detectors")
    p.add_argument("netlists", nargs="+", help=".sp files or directories of them")
    p.add_argument("--levels", "--level", type=_levels, default=list(LEVELS), help=f"comma list from {all_levels}")
    p.add_argument("--roles", help='JSON net-role overrides, e.g. \'{"inputs": ["vinp", "vinn"]}\'')
    p.add_argument("--out", help="directory for <id>.hl1/.hl2/.hl3 documents (default: print)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("pred_dir")
    p.add_argument("truth_dir")
    p.add_argument("--levels", "--level", type=_levels, default=list(LEVELS))
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("prepare", help="anonymize, canonicalize, merge mirrors and bucket a corpus")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--reserved-nets", type=_csv, default=None, help="comma list of net names kept as is")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("stats", help="label and size statistics of a corpus")
    p.add_argument("corpus", nargs="?", help="corpus directory (default: bundled demos)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="build identifier scripts with a language model")
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--targets", type=_csv, default=["HL1", "CM", "DiffPair", "Inverter", "HL3"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("infer", help="label netlists with a stored codebase")
    p.add_argument("netlists", nargs="+")
    p.add_argument("--codebase", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--levels", "--level", type=_levels, default=list(LEVELS))
    p.add_argument("--timeout", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_infer)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON argument: {exc}", file=sys.stderr)
        return EXIT_OTHER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
