"""Subcircuit labels, instances and per-level annotation sets.

An annotation document is the JSON list
``[{"sub_circuit_name": <label>, "components": [<device>, ...]}, ...]``
for a single hierarchy level.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

HL1, HL2, HL3 = "HL1", "HL2", "HL3"
LEVELS = (HL1, HL2, HL3)

LEVEL_LABELS: dict[str, tuple[str, ...]] = {
    HL1: ("MosfetDiode", "load_cap", "compensation_cap"),
    HL2: ("CM", "DiffPair", "Inverter"),
    HL3: ("firstStage", "secondStage", "thirdStage", "feedBack", "loadPart", "biasPart"),
}
CANONICAL_LEVEL = {label: lvl for lvl, labels in LEVEL_LABELS.items() for label in labels}


class AnnotationError(ValueError):
    pass


def normalize_level(level: str) -> str:
    up = level.upper()
    return up if up in LEVELS else level


def device_sort_key(name: str):
    """Natural order: m2 before m10."""
    return [int(tok) if tok.isdigit() else tok.lower() for tok in re.split(r"(\d+)", name)]


@dataclass(frozen=True)
class SubcircuitInstance:
    label: str
    components: frozenset[str]

    def __post_init__(self):
        if not isinstance(self.components, frozenset):
            object.__setattr__(self, "components", frozenset(self.components))
        if not self.components:
            raise AnnotationError(f"{self.label}: instance has no components")

    def __len__(self) -> int:
        return len(self.components)

    def sorted_components(self) -> list[str]:
        return sorted(self.components, key=device_sort_key)

    def to_json(self) -> dict:
        return {"sub_circuit_name": self.label, "components": self.sorted_components()}


def _dedupe(instances: Iterable[SubcircuitInstance]) -> tuple[SubcircuitInstance, ...]:
    return tuple(dict.fromkeys(instances))


@dataclass(frozen=True)
class AnnotationSet:
    """Instances grouped by hierarchy level; duplicates within a level are dropped."""

    levels: Mapping[str, tuple[SubcircuitInstance, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {lvl: _dedupe(insts) for lvl, insts in self.levels.items()}
        object.__setattr__(self, "levels", clean)

    @classmethod
    def single(cls, level: str, instances: Iterable[SubcircuitInstance]) -> "AnnotationSet":
        return cls({level: tuple(instances)})

    def level(self, level: str) -> tuple[SubcircuitInstance, ...]:
        return self.levels.get(level, ())

    def union(self, other: "AnnotationSet") -> "AnnotationSet":
        merged = {lvl: list(insts) for lvl, insts in self.levels.items()}
        for lvl, insts in other.levels.items():
            merged.setdefault(lvl, []).extend(insts)
        return AnnotationSet({k: tuple(v) for k, v in merged.items()})

    def devices(self, level: str | None = None) -> set[str]:
        lvls = [level] if level else list(self.levels)
        return {d for lvl in lvls for inst in self.level(lvl) for d in inst.components}

    def is_empty(self) -> bool:
        return not any(self.levels.values())

    def __iter__(self) -> Iterator[tuple[str, SubcircuitInstance]]:
        for lvl, insts in self.levels.items():
            for inst in insts:
                yield lvl, inst

    def __eq__(self, other):
        if not isinstance(other, AnnotationSet):
            return NotImplemented
        keys = {k for k, v in self.levels.items() if v} | {k for k, v in other.levels.items() if v}
        return all(set(self.level(k)) == set(other.level(k)) for k in keys)

    def __hash__(self):
        return hash(frozenset((k, frozenset(v)) for k, v in self.levels.items() if v))


def instances_to_document(instances: Iterable[SubcircuitInstance]) -> list[dict]:
    insts = sorted(instances, key=lambda i: (i.label, device_sort_key(",".join(i.sorted_components()))))
    return [inst.to_json() for inst in insts]


def dump_level(annotations: AnnotationSet, level: str) -> str:
    """JSON document for one level, one instance per line."""
    items = [json.dumps(item) for item in instances_to_document(annotations.level(level))]
    return "[\n" + ",\n".join(items) + "\n]" if items else "[]"


def instances_from_document(doc) -> list[SubcircuitInstance]:
    if not isinstance(doc, list):
        raise AnnotationError("annotation document must be a list of objects")
    out = []
    for item in doc:
        if isinstance(item, Mapping):
            try:
                label, comps = item["sub_circuit_name"], item["components"]
            except KeyError as exc:
                raise AnnotationError(f"missing key {exc.args[0]!r} in {item!r}") from None
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            label, comps = item
        else:
            raise AnnotationError(f"unrecognised annotation entry {item!r}")
        if not isinstance(label, str) or not isinstance(comps, (list, tuple)) \
                or not all(isinstance(c, str) for c in comps):
            raise AnnotationError(f"bad annotation entry {item!r}")
        out.append(SubcircuitInstance(label, frozenset(comps)))
    return out
