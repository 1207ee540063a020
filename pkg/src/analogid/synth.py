"""Seeded random netlists built from mirror, pair and inverter motifs plus noise.

Used to cross-check the detectors against the exhaustive oracle.
"""
from __future__ import annotations

import random

from .netlist import Netlist, parse_netlist

_RAILS = {"nmos": "ground", "pmos": "supply"}
_INTERNAL = tuple("abcdefgh")


class _Builder:
    def __init__(self, rng: random.Random, max_devices: int):
        self.rng = rng
        self.max = max_devices
        self.lines: list[str] = []
        self.n = 0
        self.fresh = 0

    def room(self, k: int) -> bool:
        return self.n + k <= self.max

    def net(self) -> str:
        pool = _INTERNAL + ("supply", "ground", "ibias", "out", "in1", "in2")
        return self.rng.choice(pool)

    def new_net(self) -> str:
        self.fresh += 1
        return f"n{self.fresh}"

    def mos(self, d, g, s, b, ch):
        self.n += 1
        self.lines.append(f"m{self.n} {d} {g} {s} {b} {ch}")

    def simple_mirror(self):
        k = self.rng.choice((2, 2, 3))
        if not self.room(k):
            return
        ch = self.rng.choice(("nmos", "pmos"))
        gate = self.rng.choice(_INTERNAL + ("ibias",))
        src = _RAILS[ch] if self.rng.random() < 0.8 else self.net()
        for i in range(k):
            drain = gate if i == 0 else self.net()
            bulk = src if self.rng.random() < 0.9 else self.net()
            self.mos(drain, gate, src, bulk, ch)

    def cascode_mirror(self):
        if not self.room(4):
            return
        ch = self.rng.choice(("nmos", "pmos"))
        rail = _RAILS[ch]
        g_low, g_high = self.rng.sample(_INTERNAL, 2)
        mids = [self.new_net(), self.new_net()]
        if self.rng.random() < 0.3:
            mids[1] = mids[0]
        for m in mids:
            self.mos(m, g_low, rail, rail, ch)
        self.mos(g_high, g_high, mids[0], mids[0], ch)
        self.mos(self.net(), g_high, mids[1], mids[1], ch)

    def diff_pair(self):
        if not self.room(2):
            return
        ch = self.rng.choice(("nmos", "pmos"))
        tail = self.rng.choice(_INTERNAL)
        self.mos(self.net(), "in1", tail, tail, ch)
        self.mos(self.net(), "in2", tail, tail, ch)

    def inverter(self):
        if not self.room(2):
            return
        mid, gate = self.rng.choice(_INTERNAL + ("out",)), self.rng.choice(_INTERNAL)
        self.mos(mid, gate, "supply", "supply", "pmos")
        self.mos(mid, gate, "ground", "ground", "nmos")

    def noise(self):
        if self.room(1):
            self.mos(self.net(), self.net(), self.net(), self.net(), self.rng.choice(("nmos", "pmos")))


def random_netlist(rng: random.Random, max_devices: int = 14) -> Netlist:
    """At most ``max_devices`` devices, up to two of them capacitors."""
    b = _Builder(rng, max_devices)
    motifs = (b.simple_mirror, b.cascode_mirror, b.diff_pair, b.inverter, b.noise, b.noise)
    for _ in range(rng.randint(1, 6)):
        rng.choice(motifs)()
    lines = list(b.lines)
    rng.shuffle(lines)
    for i in range(min(rng.randint(0, 2), max_devices - b.n)):
        lines.append(f"c{i + 1} {rng.choice(('out', 'a', 'b'))} {rng.choice(('ground', 'c', 'out'))}")
    return parse_netlist("\n".join(lines))


def random_corpus(seed: int, count: int, max_devices: int = 14) -> list[Netlist]:
    rng = random.Random(seed)
    return [random_netlist(rng, max_devices) for _ in range(count)]
