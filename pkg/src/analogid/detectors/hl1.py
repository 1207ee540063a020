"""Device-level roles: diode-connected transistors, load and compensation capacitors."""
from __future__ import annotations

from ..annotations import HL1, AnnotationSet, SubcircuitInstance
from ..netlist import Netlist, NetRoles


def detect_diode_connected(netlist: Netlist) -> list[SubcircuitInstance]:
    diodes = [d.name for d in netlist.mosfets if d.is_diode]
    return [SubcircuitInstance("MosfetDiode", frozenset(diodes))] if diodes else []


def detect_capacitor_roles(netlist: Netlist, roles: NetRoles) -> list[SubcircuitInstance]:
    outputs = set(roles.outputs)
    rails = roles.rails
    load, comp = [], []
    for cap in netlist.capacitors:
        a, b = cap.nets
        for x, y in ((a, b), (b, a)):
            if x in outputs and y in rails:
                load.append(cap.name)
                break
            if x in outputs and y in roles.internal:
                comp.append(cap.name)
                break
        else:
            if a in roles.internal and b in roles.internal and a != b:
                comp.append(cap.name)
    found = []
    if load:
        found.append(SubcircuitInstance("load_cap", frozenset(load)))
    if comp:
        found.append(SubcircuitInstance("compensation_cap", frozenset(comp)))
    return found


def detect_hl1(netlist: Netlist, roles: NetRoles) -> AnnotationSet:
    return AnnotationSet.single(
        HL1, detect_diode_connected(netlist) + detect_capacitor_roles(netlist, roles))
