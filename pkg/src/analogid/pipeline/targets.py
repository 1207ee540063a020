"""Subcircuit targets the pipeline can build identifiers for."""
from __future__ import annotations

from dataclasses import dataclass

from ..annotations import HL1, HL2, HL3, LEVEL_LABELS


@dataclass(frozen=True)
class Target:
    name: str
    level: str
    labels: tuple[str, ...]
    description: str


TARGETS: dict[str, Target] = {t.name: t for t in (
    Target("HL1", HL1, LEVEL_LABELS[HL1], "diode-connected transistors and load/compensation capacitors"),
    Target("CM", HL2, ("CM",), "current mirrors"),
    Target("DiffPair", HL2, ("DiffPair",), "differential pairs"),
    Target("Inverter", HL2, ("Inverter",), "analog inverters"),
    Target("HL3", HL3, LEVEL_LABELS[HL3], "amplification stages, feedback, load and bias parts"),
)}


def get_target(name: str) -> Target:
    try:
        return TARGETS[name]
    except KeyError:
        raise KeyError(f"unknown target {name!r}; choose from {', '.join(TARGETS)}") from None


def target_for_description(text: str) -> Target | None:
    """The target whose description appears first in ``text``."""
    hits = [(text.find(t.description), t.name) for t in TARGETS.values() if t.description in text]
    return TARGETS[min(hits)[1]] if hits else None
