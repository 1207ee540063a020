"""Current-mirror detection.

Two passes over same-channel gate groups. The cascode pass looks for a gate
group (common source and bulk) whose drains each feed the source of a device
outside the group, those "main" devices all sharing one gate; both gate nets
are then suppressed. The simple pass accepts every remaining gate group with a
common source, bulks tied to that source and at least one diode-connected
member. Instances sharing a diode-connected transistor are merged afterwards.
"""
from __future__ import annotations

from collections import Counter, defaultdict

from ..annotations import SubcircuitInstance
from ..netlist import Device, Netlist


def gate_groups(devs: list[Device]) -> dict[str, list[Device]]:
    groups: dict[str, list[Device]] = defaultdict(list)
    for d in devs:
        groups[d.gate].append(d)
    return groups


def by_channel(netlist: Netlist) -> dict[str, list[Device]]:
    chans: dict[str, list[Device]] = {"nmos": [], "pmos": []}
    for d in netlist.mosfets:
        chans[d.channel].append(d)
    return chans


def cascode_mains(group: list[Device], devs: list[Device]) -> list[Device] | None:
    """Devices stacked on the group's drains, or None if the stack is incomplete.

    Every drain net of the group must feed at least as many outside devices
    (by source) as there are group members draining into it, so each member
    can be paired with a distinct main device.
    """
    members = {d.name for d in group}
    drains = Counter(d.drain for d in group)
    mains = [d for d in devs if d.name not in members and d.source in drains]
    supply = Counter(d.source for d in mains)
    if any(supply[net] < need for net, need in drains.items()):
        return None
    return mains


def _uniform(group: list[Device], attr: str) -> bool:
    return len({getattr(d, attr) for d in group}) == 1


def merge_on_shared_diodes(groups: list[frozenset[str]], diodes: set[str]) -> list[frozenset[str]]:
    parent = list(range(len(groups)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, g in enumerate(groups):
        for name in g & diodes:
            if name in owner:
                parent[find(i)] = find(owner[name])
            else:
                owner[name] = i
    merged: dict[int, set[str]] = {}
    for i, g in enumerate(groups):
        merged.setdefault(find(i), set()).update(g)
    return [frozenset(v) for v in merged.values()]


def drop_contained(groups: list[frozenset[str]]) -> list[frozenset[str]]:
    uniq = list(dict.fromkeys(groups))
    return [g for g in uniq if not any(g < other for other in uniq)]


def detect_current_mirrors(netlist: Netlist) -> list[SubcircuitInstance]:
    chans = by_channel(netlist)
    found: list[frozenset[str]] = []
    suppressed: set[tuple[str, str]] = set()

    for ch, devs in chans.items():
        for gate, group in gate_groups(devs).items():
            if len(group) < 2 or not (_uniform(group, "source") and _uniform(group, "bulk")):
                continue
            mains = cascode_mains(group, devs)
            if mains is None or len(mains) < 2 or not _uniform(mains, "gate"):
                continue
            found.append(frozenset(d.name for d in group + mains))
            suppressed.update({(ch, gate), (ch, mains[0].gate)})

    for ch, devs in chans.items():
        for gate, group in gate_groups(devs).items():
            if (ch, gate) in suppressed or len(group) < 2 or not _uniform(group, "source"):
                continue
            src = group[0].source
            if all(d.bulk == src for d in group) and any(d.is_diode for d in group):
                found.append(frozenset(d.name for d in group))

    diodes = {d.name for d in netlist.mosfets if d.is_diode}
    merged = drop_contained(merge_on_shared_diodes(list(dict.fromkeys(found)), diodes))
    return [SubcircuitInstance("CM", g) for g in merged]
