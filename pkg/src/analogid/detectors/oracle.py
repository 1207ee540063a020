"""Exhaustive current-mirror oracle for small netlists.

Enumerates every subset of same-channel transistors and tests it against a
declarative description of a mirror, without building gate groups up front.
Exponential; only for cross-checking on tiny circuits.
"""
from __future__ import annotations

from ..annotations import SubcircuitInstance
from ..netlist import Device, Netlist

MAX_DEVICES = 16


class TooLarge(ValueError):
    def __init__(self, n: int):
        super().__init__(f"oracle limited to {MAX_DEVICES} devices, got {n}")
        self.n = n


def _is_cascode(sub: list[Device], devs: list[Device]) -> tuple[str, str] | None:
    gates = sorted({d.gate for d in sub})
    if len(gates) != 2:
        return None
    for cas_gate, main_gate in (gates, gates[::-1]):
        cas = [d for d in sub if d.gate == cas_gate]
        mains = [d for d in sub if d.gate == main_gate]
        # the cascode side is a complete gate group
        if any(d.gate == cas_gate and d not in sub for d in devs):
            continue
        if len(cas) < 2 or len(mains) < 2:
            continue
        if len({d.source for d in cas}) != 1 or len({d.bulk for d in cas}) != 1:
            continue
        drains = [d.drain for d in cas]
        if any(m.source not in drains for m in mains):
            continue
        # every outside device stacked on a cascode drain must be included
        if any(d not in sub and d not in cas and d.source in drains for d in devs):
            continue
        if all(sum(m.source == n for m in mains) >= drains.count(n) for n in drains):
            return cas_gate, main_gate
    return None


def _is_simple(sub: list[Device], devs: list[Device]) -> str | None:
    gates = {d.gate for d in sub}
    if len(sub) < 2 or len(gates) != 1:
        return None
    gate = next(iter(gates))
    if any(d.gate == gate and d not in sub for d in devs):
        return None
    src = sub[0].source
    if any(d.source != src or d.bulk != src for d in sub):
        return None
    if not any(d.drain == d.gate for d in sub):
        return None
    return gate


def _merge_fixpoint(groups: list[set[str]], diodes: set[str]) -> list[set[str]]:
    groups = [set(g) for g in groups]
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if groups[i] & groups[j] & diodes:
                    groups[i] |= groups.pop(j)
                    merged = True
                    break
            if merged:
                break
    return groups


def brute_force_cm_oracle(netlist: Netlist) -> list[SubcircuitInstance]:
    # capacitors never join a mirror, so only transistors count toward the limit
    if len(netlist.mosfets) > MAX_DEVICES:
        raise TooLarge(len(netlist.mosfets))
    valid: list[set[str]] = []
    for channel in ("nmos", "pmos"):
        devs = [d for d in netlist.mosfets if d.channel == channel]
        cascodes, simples = [], []
        suppressed: set[str] = set()
        for mask in range(1, 1 << len(devs)):
            sub = [d for i, d in enumerate(devs) if mask >> i & 1]
            if len(sub) < 2:
                continue
            hit = _is_cascode(sub, devs)
            if hit:
                cascodes.append(sub)
                suppressed.update(hit)
                continue
            gate = _is_simple(sub, devs)
            if gate is not None:
                simples.append((gate, sub))
        valid += [{d.name for d in sub} for sub in cascodes]
        valid += [{d.name for d in sub} for gate, sub in simples if gate not in suppressed]

    unique = []
    for g in valid:
        if g not in unique:
            unique.append(g)
    maximal = [g for g in unique if not any(g < h for h in unique)]
    diodes = {d.name for d in netlist.mosfets if d.is_diode}
    merged = _merge_fixpoint(maximal, diodes)
    final = [g for g in merged if not any(g < h for h in merged)]
    return [SubcircuitInstance("CM", frozenset(g)) for g in final]
