"""Rule-based subcircuit detectors for the three hierarchy levels."""
from __future__ import annotations

from typing import Iterable

from ..annotations import HL1, HL2, HL3, AnnotationSet
from ..netlist import Netlist, NetRoles, classify_nets
from .hl1 import detect_capacitor_roles, detect_diode_connected, detect_hl1
from .inverters import detect_inverters
from .mirrors import detect_current_mirrors
from .oracle import TooLarge, brute_force_cm_oracle
from .pairs import detect_diff_pairs
from .stages import detect_hl3

__all__ = [
    "TooLarge", "brute_force_cm_oracle", "detect_capacitor_roles", "detect_current_mirrors",
    "detect_diff_pairs", "detect_diode_connected", "detect_hl1", "detect_hl2", "detect_hl3",
    "detect_inverters", "identify",
]


def detect_hl2(netlist: Netlist, roles: NetRoles) -> AnnotationSet:
    found = (detect_current_mirrors(netlist) + detect_diff_pairs(netlist, roles)
             + detect_inverters(netlist, roles))
    return AnnotationSet.single(HL2, found)


def identify(netlist: Netlist, roles: NetRoles | None = None,
             levels: Iterable[str] = (HL1, HL2, HL3)) -> AnnotationSet:
    """Run the detectors for the requested levels."""
    roles = roles or classify_nets(netlist)
    levels = set(levels)
    out = AnnotationSet()
    if HL1 in levels:
        out = out.union(detect_hl1(netlist, roles))
    if HL2 in levels or HL3 in levels:
        hl2 = detect_hl2(netlist, roles)
        if HL2 in levels:
            out = out.union(hl2)
        if HL3 in levels:
            out = out.union(detect_hl3(netlist, roles, hl2))
    return out
