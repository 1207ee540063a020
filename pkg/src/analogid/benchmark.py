"""Labeled corpus handling: loading, label normalization, auditing and statistics.

A corpus directory holds ``<id>.sp`` netlists next to optional
``<id>.hl1``, ``<id>.hl2`` and ``<id>.hl3`` annotation documents.
"""
from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .annotations import (CANONICAL_LEVEL, LEVEL_LABELS, LEVELS, AnnotationError, AnnotationSet,
                          SubcircuitInstance, instances_from_document, instances_to_document,
                          normalize_level)
from .metrics import EmptyCorpus
from .netlist import Netlist, parse_netlist

# variant name -> canonical label, one row per variant in the benchmark taxonomy
TAXONOMY: dict[str, str] = {
    "MosfetDiodeArray": "MosfetDiode",
    "CapacitorArray(type=load)": "load_cap",
    "CapacitorArray(type=compensation)": "compensation_cap",
    "MosfetSimpleCurrentMirror": "CM",
    "MosfetCascodeCurrentMirror": "CM",
    "MosfetWideSwingCascodeCurrentMirror": "CM",
    "MosfetFourTransistorCurrentMirror": "CM",
    "MosfetWilsonCurrentMirror": "CM",
    "MosfetImprovedWilsonCurrentMirror": "CM",
    "MosfetDifferentialPair": "DiffPair",
    "MosfetCascodedDifferentialPair": "DiffPair",
    "MosfetFoldedCascodeDifferentialPair": "DiffPair",
    "MosfetAnalogInverter": "Inverter",
    "MosfetCascodedAnalogInverter": "Inverter",
    "MosfetCascodedPMOSAnalogInverter": "Inverter",
    "MosfetCascodedNMOSAnalogInverter": "Inverter",
    "MosfetCascodePMOSAnalogInverterOneDiodeTransistor": "Inverter",
    "MosfetCascodeNMOSAnalogInverterOneDiodeTransistor": "Inverter",
    "MosfetCascodeAnalogInverterNmosDiodeTransistor": "Inverter",
    "MosfetCascodeAnalogInverterPmosDiodeTransistor": "Inverter",
    "MosfetCascodeAnalogInverterNmosCurrentMirrorLoad": "Inverter",
    "firstStage": "firstStage",
    "secondStage": "secondStage",
    "thirdStage": "thirdStage",
    "loadPart": "loadPart",
    "biasPart": "biasPart",
    "feedBack": "feedBack",
}

SMALL, MEDIUM, LARGE = "Small", "Medium", "Large"
BUCKETS = (SMALL, MEDIUM, LARGE)
LEVEL_SUFFIX = {lvl: "." + lvl.lower() for lvl in LEVELS}


class UnknownLabel(AnnotationError):
    def __init__(self, name: str):
        super().__init__(f"unknown subcircuit label {name!r}")
        self.name = name


class MalformedDocument(AnnotationError):
    pass


class CorpusMismatch(ValueError):
    """Prediction and truth directories do not hold the same ids."""

    def __init__(self, orphans: Iterable[str]):
        self.orphans = sorted(orphans)
        super().__init__("unmatched ids: " + ", ".join(self.orphans))


def canonical_label(name: str, taxonomy: Mapping[str, str] = TAXONOMY) -> str:
    if name in CANONICAL_LEVEL:
        return name
    squashed = name.replace(" ", "")
    if squashed in taxonomy:
        return taxonomy[squashed]
    raise UnknownLabel(name)


def label_level(name: str, taxonomy: Mapping[str, str] = TAXONOMY) -> str:
    return CANONICAL_LEVEL[canonical_label(name, taxonomy)]


def load_labels(text: str, level: str | None = None, taxonomy: Mapping[str, str] = TAXONOMY) -> AnnotationSet:
    """Parse an annotation document, keeping variant names as written.

    The document is either a plain list of ``{sub_circuit_name, components}``
    objects or an object mapping level names to such lists. For a plain list
    the level comes from ``level`` or, failing that, from each label.
    """
    try:
        doc = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from None
    if isinstance(doc, dict):
        groups = [(normalize_level(k), v) for k, v in doc.items()]
    else:
        groups = [(normalize_level(level) if level else None, doc)]
    out: dict[str, list[SubcircuitInstance]] = {}
    for lvl, items in groups:
        if lvl is not None and lvl not in LEVELS:
            raise MalformedDocument(f"unknown level {lvl!r}")
        try:
            insts = instances_from_document(items)
        except AnnotationError as exc:
            raise MalformedDocument(str(exc)) from None
        for inst in insts:
            inferred = label_level(inst.label, taxonomy)
            if lvl is not None and inferred != lvl:
                raise MalformedDocument(f"label {inst.label!r} does not belong to {lvl}")
            out.setdefault(lvl or inferred, []).append(inst)
    return AnnotationSet({k: tuple(v) for k, v in out.items()})


def dump_labels(truth: AnnotationSet, indent: int | None = None) -> str:
    """Level-keyed document; ``load_labels`` reads it back unchanged."""
    doc = {lvl: instances_to_document(truth.level(lvl)) for lvl in LEVELS if truth.level(lvl)}
    return json.dumps(doc, indent=indent)


def canonicalize(truth: AnnotationSet, taxonomy: Mapping[str, str] = TAXONOMY) -> AnnotationSet:
    levels: dict[str, list[SubcircuitInstance]] = {}
    for lvl, inst in truth:
        levels.setdefault(lvl, []).append(SubcircuitInstance(canonical_label(inst.label, taxonomy), inst.components))
    return AnnotationSet({k: tuple(v) for k, v in levels.items()})


def merge_shared_diode_cms(truth: AnnotationSet, netlist: Netlist) -> AnnotationSet:
    """Union CM instances that share a diode-connected transistor."""
    diodes = {d.name for d in netlist.mosfets if d.is_diode}
    levels = {}
    for lvl, insts in truth.levels.items():
        cms = [i for i in insts if i.label == "CM"]
        if len(cms) < 2:
            levels[lvl] = insts
            continue
        parent = list(range(len(cms)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        owner: dict[str, int] = {}
        for i, cm in enumerate(cms):
            for dev in cm.components & diodes:
                if dev in owner:
                    parent[find(i)] = find(owner[dev])
                else:
                    owner[dev] = i
        merged: dict[int, set[str]] = {}
        for i, cm in enumerate(cms):
            merged.setdefault(find(i), set()).update(cm.components)
        rest = [i for i in insts if i.label != "CM"]
        levels[lvl] = tuple([SubcircuitInstance("CM", frozenset(g)) for g in merged.values()] + rest)
    return AnnotationSet(levels)


def channel_violations(truth: AnnotationSet, netlist: Netlist) -> list[SubcircuitInstance]:
    """CM/DiffPair instances mixing channels and Inverters lacking one."""
    bad = []
    for inst in truth.level("HL2"):
        label = canonical_label(inst.label)
        channels = {netlist.device(n).channel for n in inst.components
                    if n in netlist and netlist.device(n).is_mosfet}
        if label in ("CM", "DiffPair") and len(channels) > 1:
            bad.append(inst)
        elif label == "Inverter" and channels != {"nmos", "pmos"}:
            bad.append(inst)
    return bad


def size_bucket(netlist: Netlist) -> str:
    n = len(netlist.mosfets)
    if n < 20:
        return SMALL
    return MEDIUM if n <= 30 else LARGE


@dataclass
class BenchmarkEntry:
    id: str
    netlist: Netlist
    truth: AnnotationSet
    warnings: list[str] = field(default_factory=list)

    @property
    def transistor_count(self) -> int:
        return len(self.netlist.mosfets)

    @property
    def size_bucket(self) -> str:
        return size_bucket(self.netlist)


def _audit(entry: BenchmarkEntry) -> None:
    missing = entry.truth.devices() - {d.name for d in entry.netlist}
    if missing:
        entry.warnings.append(f"annotations name unknown devices {sorted(missing)}")
    for inst in channel_violations(entry.truth, entry.netlist):
        entry.warnings.append(f"{inst.label} {inst.sorted_components()} breaks channel purity")


def load_entry(directory: str | os.PathLike, entry_id: str) -> BenchmarkEntry:
    base = Path(directory)
    netlist = parse_netlist((base / f"{entry_id}.sp").read_text())
    truth = AnnotationSet()
    for lvl, suffix in LEVEL_SUFFIX.items():
        path = base / f"{entry_id}{suffix}"
        if path.exists():
            truth = truth.union(load_labels(path.read_text(), lvl))
    entry = BenchmarkEntry(entry_id, netlist, truth)
    _audit(entry)
    return entry


def corpus_ids(directory: str | os.PathLike) -> list[str]:
    return sorted(p.stem for p in Path(directory).glob("*.sp"))


def load_corpus(directory: str | os.PathLike) -> list[BenchmarkEntry]:
    return [load_entry(directory, i) for i in corpus_ids(directory)]


def demo_corpus_dir() -> Path:
    return Path(str(resources.files("analogid") / "data" / "demos"))


def load_demo_corpus() -> list[BenchmarkEntry]:
    return load_corpus(demo_corpus_dir())


@dataclass
class CorpusStats:
    instances: Counter
    circuits: Counter
    buckets: Counter
    total: int

    def format(self) -> str:
        known = [(lvl, lab) for lvl in LEVELS for lab in LEVEL_LABELS[lvl]]
        extra = sorted(set(self.instances) - {lab for _, lab in known})
        rows = [(lvl, lab) for lvl, lab in known] + [("?", lab) for lab in extra]
        width = max(len(lab) for _, lab in rows) + 2
        lines = [f"{'Level':<6}{'Label':<{width}}{'#instances':>11}{'#circuits':>11}"]
        for lvl, lab in rows:
            lines.append(f"{lvl:<6}{lab:<{width}}{self.instances[lab]:>11}{self.circuits[lab]:>11}")
        lines.append("")
        lines.append(f"{'Bucket':<{width + 6}}{'#circuits':>11}")
        for b in BUCKETS:
            lines.append(f"{b:<{width + 6}}{self.buckets[b]:>11}")
        lines.append(f"{'Total':<{width + 6}}{self.total:>11}")
        return "\n".join(lines)


def corpus_stats(entries: Iterable[BenchmarkEntry]) -> CorpusStats:
    instances: Counter = Counter()
    circuits: Counter = Counter()
    buckets: Counter = Counter()
    total = 0
    for entry in entries:
        total += 1
        buckets[entry.size_bucket] += 1
        labels = [inst.label for _, inst in entry.truth]
        instances.update(labels)
        circuits.update(set(labels))
    if not total:
        raise EmptyCorpus("no entries")
    return CorpusStats(instances, circuits, buckets, total)
