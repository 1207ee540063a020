from __future__ import annotations

from itertools import combinations

from ..annotations import SubcircuitInstance
from ..netlist import Netlist, NetRoles


def detect_diff_pairs(netlist: Netlist, roles: NetRoles) -> list[SubcircuitInstance]:
    """Same-channel pairs sharing source and bulk, gates on two distinct inputs.

    When the shared source net is fed by two or more same-channel devices
    (outside the pair) whose gates are tied together, one per pair member,
    those devices are included as the pair's cascodes.
    """
    inputs = set(roles.inputs)
    if len(inputs) < 2:
        return []
    mos = netlist.mosfets
    candidates = [d for d in mos if d.gate in inputs]
    found = []
    for a, b in combinations(candidates, 2):
        if a.channel != b.channel or a.gate == b.gate:
            continue
        if a.source != b.source or a.bulk != b.bulk:
            continue
        names = {a.name, b.name}
        feeders = [d for d in mos if d.channel == a.channel and d.drain == a.source
                   and d.name not in names]
        if len(feeders) >= 2 and len({d.gate for d in feeders}) == 1:
            names.update(d.name for d in feeders)
        found.append(SubcircuitInstance("DiffPair", frozenset(names)))
    return list(dict.fromkeys(found))
