"""Analog inverters: a pmos pull-up and an nmos pull-down meeting at one net.

Each side is a stack of one or two same-channel devices running from the
drive net to its rail (pmos to supply, nmos to ground). The middle net of a
two-device stack must carry no other drain or source connection. Each side
needs at least one device whose gate sits on a signal net, meaning a net that
is not a rail, not a bias net and not the drive net itself; a diode-connected
cascode therefore cannot make up a side on its own.
"""
from __future__ import annotations

from collections import defaultdict

from ..annotations import SubcircuitInstance
from ..netlist import Device, Netlist, NetRoles


def _channel_paths(drive: str, channel: str, rail: frozenset[str],
                   by_drain: dict, ds_count: dict) -> list[tuple[Device, ...]]:
    paths = []
    for top in by_drain.get((channel, drive), ()):
        if top.source in rail:
            paths.append((top,))
            continue
        mid = top.source
        if ds_count.get(mid, 0) != 2:
            continue
        for low in by_drain.get((channel, mid), ()):
            if low is not top and low.source in rail:
                paths.append((top, low))
    return paths


def detect_inverters(netlist: Netlist, roles: NetRoles) -> list[SubcircuitInstance]:
    by_drain: dict[tuple[str, str], list[Device]] = defaultdict(list)
    ds_count: dict[str, int] = defaultdict(int)
    for d in netlist.mosfets:
        by_drain[(d.channel, d.drain)].append(d)
        ds_count[d.drain] += 1
        ds_count[d.source] += 1

    non_signal = roles.rails | roles.bias

    def driven(path, drive):
        return any(d.gate not in non_signal and d.gate != drive for d in path)

    found = []
    for net in netlist.ordered_nets():
        if net in roles.rails:
            continue
        ups = [p for p in _channel_paths(net, "pmos", roles.supply, by_drain, ds_count)
               if driven(p, net)]
        if not ups:
            continue
        downs = [p for p in _channel_paths(net, "nmos", roles.ground, by_drain, ds_count)
                 if driven(p, net)]
        for up in ups:
            for down in downs:
                found.append(frozenset(d.name for d in up + down))
    found = list(dict.fromkeys(found))
    # a bare stack is dropped when a longer stack on the same net covers it
    return [SubcircuitInstance("Inverter", g) for g in found if not any(g < h for h in found)]
