"""Stage-level grouping (HL3) traced from the input pair along gate chains.

Precedence when a transistor qualifies for several groups:
firstStage > secondStage > thirdStage > feedBack > loadPart > biasPart.
"""
from __future__ import annotations

from ..annotations import HL2, HL3, AnnotationSet, SubcircuitInstance
from ..netlist import Device, Netlist, NetRoles
from .hl1 import detect_capacitor_roles


def _trace_stages(mos: list[Device], first: set[str], roles: NetRoles) -> tuple[list[list[Device]], set[str]]:
    """Gate-chain layers after the first stage, pruned to those that reach an output.

    Returns the kept layers and the first stage's drain nets.
    """
    outputs = set(roles.outputs)
    rails = roles.rails
    first_nets = {d.drain for d in mos if d.name in first} - rails
    seen = set(first_nets)
    frontier = first_nets - outputs
    taken = set(first)
    layers: list[list[Device]] = []
    while frontier:
        layer = [d for d in mos if d.name not in taken and d.gate in frontier
                 and d.drain not in seen and d.drain not in rails]
        if not layer:
            break
        layers.append(layer)
        taken.update(d.name for d in layer)
        new = {d.drain for d in layer}
        seen |= new
        frontier = new - outputs

    good = set(outputs)
    kept: list[list[Device]] = [[] for _ in layers]
    for k in reversed(range(len(layers))):
        kept[k] = [d for d in layers[k] if d.drain in good]
        good |= {d.gate for d in kept[k]}
    return kept, first_nets


def _bias_rooted(mos: list[Device], roles: NetRoles, mirrors: list[frozenset[str]],
                 signal: set[str]) -> set[str]:
    """Transistors fed, directly or through current mirrors, from a bias net.

    Propagation runs through reference currents only, so it never crosses a
    signal net.
    """
    by_name = {d.name: d for d in mos}
    rooted = {d.name for d in mos if any(n in roles.bias for n in d.nets)}
    changed = True
    while changed:
        changed = False
        touched = {n for name in rooted for n in (by_name[name].drain, by_name[name].source)} - signal
        for cm in mirrors:
            if cm <= rooted:
                continue
            ref_nets = {by_name[n].drain for n in cm if by_name[n].is_diode}
            if cm & rooted or ref_nets & touched:
                rooted |= cm
                changed = True
    return rooted


def _reaches_rail(net: str, mos: list[Device], rails: frozenset[str], skip: set[str], depth: int = 3) -> bool:
    if net in rails:
        return True
    if depth == 0:
        return False
    return any(d.drain == net and d.name not in skip and d.source != net
               and _reaches_rail(d.source, mos, rails, skip, depth - 1) for d in mos)


def detect_hl3(netlist: Netlist, roles: NetRoles, hl2: AnnotationSet) -> AnnotationSet:
    mos = netlist.mosfets
    inputs = set(roles.inputs)
    outputs = set(roles.outputs)
    by_name = {d.name: d for d in mos}

    first: set[str] = set()
    for inst in hl2.level(HL2):
        if inst.label == "DiffPair" and any(by_name[n].gate in inputs for n in inst.components if n in by_name):
            first |= inst.components
    if not first:
        return AnnotationSet.single(HL3, [])

    kept, first_nets = _trace_stages(mos, first, roles)
    groups: dict[str, set[str]] = {"firstStage": set(first)}
    groups["secondStage"] = {d.name for d in kept[0]} if kept else set()
    groups["thirdStage"] = {d.name for layer in kept[1:] for d in layer}
    claimed = set().union(*groups.values())

    stage_drains = {d.drain for layer in kept for d in layer}
    earlier = inputs | first_nets | (stage_drains - outputs)
    feedback = {d.name for d in mos if d.name not in claimed
                and d.gate in outputs and d.drain in earlier}
    hl1_caps = {n for inst in detect_capacitor_roles(netlist, roles) for n in inst.components}
    for cap in netlist.capacitors:
        a, b = cap.nets
        if cap.name not in hl1_caps and ((a in outputs and b in earlier) or (b in outputs and a in earlier)):
            feedback.add(cap.name)
    groups["feedBack"] = feedback
    claimed |= feedback

    mirrors = [inst.components for inst in hl2.level(HL2) if inst.label == "CM"]
    stage_out = first_nets | stage_drains
    rooted = _bias_rooted(mos, roles, mirrors, stage_out | inputs | outputs)
    load = {d.name for d in mos
            if d.name not in claimed and d.name not in rooted and d.drain in stage_out
            and _reaches_rail(d.source, mos, roles.rails, claimed)}
    for cm in mirrors:
        if cm & load:
            load |= cm - claimed - rooted
    groups["loadPart"] = load
    claimed |= load

    groups["biasPart"] = {d.name for d in mos if d.name not in claimed}

    order = ("firstStage", "secondStage", "thirdStage", "feedBack", "loadPart", "biasPart")
    return AnnotationSet.single(
        HL3, [SubcircuitInstance(label, frozenset(groups[label])) for label in order if groups[label]])
