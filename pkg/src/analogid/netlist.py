"""Flat SPICE netlists as device-terminal graphs.

Only two device kinds exist in the corpus: four-terminal MOSFETs
(``m<name> <d> <g> <s> <b> <model>``) and two-terminal capacitors
(``c<name> <n1> <n2> [value]``).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)

MOSFET_ROLES = ("drain", "gate", "source", "bulk")
CAPACITOR_ROLES = ("pos", "neg")

SUPPLY_NAMES = frozenset({"supply", "vdd", "vcc"})
GROUND_NAMES = frozenset({"ground", "gnd", "vss", "0"})
_INPUT_RE = re.compile(r"in\d*|vref", re.IGNORECASE)
_OUTPUT_RE = re.compile(r"(?:out|vout|output)\d*", re.IGNORECASE)
_BIAS_RE = re.compile(r"(?:ibias|vbias|bias)", re.IGNORECASE)

DEFAULT_RESERVED = frozenset(
    {"supply", "ground", "vdd", "vss", "gnd", "0", "out", "out1", "out2",
     "in", "in1", "in2", "ibias", "vref"}
)


class NetlistError(ValueError):
    pass


class MalformedLine(NetlistError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateDevice(NetlistError):
    def __init__(self, name: str):
        super().__init__(f"duplicate device name {name!r}")
        self.name = name


class UnknownChannel(NetlistError):
    def __init__(self, model: str):
        super().__init__(f"model {model!r} names neither nmos nor pmos")
        self.model = model


class UnknownNet(NetlistError, KeyError):
    def __init__(self, net: str):
        NetlistError.__init__(self, f"no device touches net {net!r}")
        self.net = net

    def __str__(self) -> str:
        return NetlistError.__str__(self)


class ConflictingOverride(NetlistError):
    pass


@dataclass(frozen=True)
class Device:
    name: str
    kind: str  # "mosfet" | "capacitor"
    channel: str  # "nmos" | "pmos" | "none"
    terminals: tuple[tuple[str, str], ...]  # (role, net) in grammar order

    def __post_init__(self):
        roles = tuple(r for r, _ in self.terminals)
        if self.kind == "mosfet":
            if roles != MOSFET_ROLES or self.channel not in ("nmos", "pmos"):
                raise NetlistError(f"{self.name}: bad mosfet terminals/channel")
        elif self.kind == "capacitor":
            if roles != CAPACITOR_ROLES or self.channel != "none":
                raise NetlistError(f"{self.name}: bad capacitor terminals/channel")
        else:
            raise NetlistError(f"{self.name}: unknown device kind {self.kind!r}")
        for _, net in self.terminals:
            if not net or any(ch.isspace() for ch in net):
                raise NetlistError(f"{self.name}: invalid net name {net!r}")

    def net(self, role: str) -> str:
        for r, n in self.terminals:
            if r == role:
                return n
        raise KeyError(role)

    @property
    def drain(self) -> str:
        return self.net("drain")

    @property
    def gate(self) -> str:
        return self.net("gate")

    @property
    def source(self) -> str:
        return self.net("source")

    @property
    def bulk(self) -> str:
        return self.net("bulk")

    @property
    def is_mosfet(self) -> bool:
        return self.kind == "mosfet"

    @property
    def is_diode(self) -> bool:
        """Gate shorted to drain."""
        return self.is_mosfet and self.drain == self.gate

    @property
    def nets(self) -> tuple[str, ...]:
        return tuple(n for _, n in self.terminals)

    def renamed(self, mapping: Mapping[str, str]) -> "Device":
        terms = tuple((r, mapping.get(n, n)) for r, n in self.terminals)
        return Device(self.name, self.kind, self.channel, terms)


def mosfet(name: str, d: str, g: str, s: str, b: str, channel: str) -> Device:
    return Device(name, "mosfet", channel, tuple(zip(MOSFET_ROLES, (d, g, s, b))))


def capacitor(name: str, pos: str, neg: str) -> Device:
    return Device(name, "capacitor", "none", (("pos", pos), ("neg", neg)))


@dataclass(frozen=True)
class Netlist:
    devices: tuple[Device, ...] = ()
    # original line index per device; not part of structural identity
    source_order: tuple[int, ...] = field(default=(), compare=False)
    _by_name: dict = field(default=None, init=False, repr=False, compare=False)
    _by_net: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.source_order:
            object.__setattr__(self, "source_order", tuple(range(len(self.devices))))
        if len(self.source_order) != len(self.devices):
            raise NetlistError("source_order length differs from devices")
        by_name: dict[str, Device] = {}
        by_net: dict[str, list[tuple[Device, str]]] = {}
        for dev in self.devices:
            key = dev.name.lower()
            if key in by_name:
                raise DuplicateDevice(dev.name)
            by_name[key] = dev
            for role, net in dev.terminals:
                by_net.setdefault(net, []).append((dev, role))
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_by_net", by_net)

    @property
    def nets(self) -> frozenset[str]:
        return frozenset(self._by_net)

    def ordered_nets(self) -> list[str]:
        """Nets in order of first appearance."""
        return list(self._by_net)

    @property
    def mosfets(self) -> list[Device]:
        return [d for d in self.devices if d.is_mosfet]

    @property
    def capacitors(self) -> list[Device]:
        return [d for d in self.devices if d.kind == "capacitor"]

    def device(self, name: str) -> Device:
        return self._by_name[name.lower()]

    def __contains__(self, name: str) -> bool:
        return name.lower() in self._by_name

    def __len__(self) -> int:
        return len(self.devices)

    def __iter__(self) -> Iterator[Device]:
        return iter(self.devices)


def parse_netlist(text: str) -> Netlist:
    devices: list[Device] = []
    order: list[int] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        toks = line.split()
        head = toks[0][0].lower()
        if head == "m":
            if len(toks) != 6:
                raise MalformedLine(line_no, f"mosfet needs 6 tokens, got {len(toks)}")
            model = toks[5].lower()
            if "nmos" in model:
                channel = "nmos"
            elif "pmos" in model:
                channel = "pmos"
            else:
                raise UnknownChannel(toks[5])
            dev = mosfet(toks[0], *toks[1:5], channel)
        elif head == "c":
            # optional trailing value token is ignored
            if len(toks) not in (3, 4):
                raise MalformedLine(line_no, f"capacitor needs 3 or 4 tokens, got {len(toks)}")
            dev = capacitor(toks[0], toks[1], toks[2])
        else:
            raise MalformedLine(line_no, f"unknown device prefix {toks[0][0]!r}")
        if dev.name.lower() in seen:
            raise DuplicateDevice(dev.name)
        seen.add(dev.name.lower())
        devices.append(dev)
        order.append(line_no - 1)
    return Netlist(tuple(devices), tuple(order))


def serialize_netlist(netlist: Netlist) -> str:
    lines = []
    for dev in netlist.devices:
        toks = [dev.name, *dev.nets]
        if dev.is_mosfet:
            toks.append(dev.channel)
        lines.append(" ".join(toks))
    return "".join(line + "\n" for line in lines)


def devices_on_net(netlist: Netlist, net: str) -> list[tuple[Device, str]]:
    try:
        return list(netlist._by_net[net])
    except KeyError:
        raise UnknownNet(net) from None


@dataclass(frozen=True)
class NetRoles:
    supply: frozenset[str] = frozenset()
    ground: frozenset[str] = frozenset()
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    bias: frozenset[str] = frozenset()
    internal: frozenset[str] = frozenset()

    @property
    def rails(self) -> frozenset[str]:
        return self.supply | self.ground

    @property
    def reserved(self) -> frozenset[str]:
        """Every net with an explicit role."""
        return self.supply | self.ground | set(self.inputs) | set(self.outputs) | self.bias


_ROLE_FIELDS = ("supply", "ground", "inputs", "outputs", "bias")


def _infer_role(net: str) -> str | None:
    low = net.lower()
    if low in SUPPLY_NAMES:
        return "supply"
    if low in GROUND_NAMES:
        return "ground"
    if _INPUT_RE.fullmatch(net):
        return "inputs"
    if _OUTPUT_RE.fullmatch(net):
        return "outputs"
    if _BIAS_RE.match(net):
        return "bias"
    return None


def classify_nets(netlist: Netlist, overrides: Mapping[str, Iterable[str]] | None = None) -> NetRoles:
    """Name-based net roles; each override replaces its inferred set wholesale."""
    overrides = {k: list(v) for k, v in (overrides or {}).items()}
    unknown = set(overrides) - set(_ROLE_FIELDS)
    if unknown:
        raise ConflictingOverride(f"unknown role(s) in overrides: {sorted(unknown)}")
    claimed: dict[str, str] = {}
    for role, nets in overrides.items():
        for net in nets:
            if claimed.get(net, role) != role:
                raise ConflictingOverride(f"net {net!r} assigned to both {claimed[net]} and {role}")
            claimed[net] = role

    sets: dict[str, list[str]] = {r: [] for r in _ROLE_FIELDS}
    for net in netlist.ordered_nets():
        role = _infer_role(net)
        if role is None or role in overrides or net in claimed:
            continue
        sets[role].append(net)
    for role, nets in overrides.items():
        sets[role] = list(dict.fromkeys(nets))

    explicit = set().union(*map(set, sets.values()))
    return NetRoles(
        supply=frozenset(sets["supply"]),
        ground=frozenset(sets["ground"]),
        inputs=tuple(sets["inputs"]),
        outputs=tuple(sets["outputs"]),
        bias=frozenset(sets["bias"]),
        internal=frozenset(netlist.nets - explicit),
    )


@dataclass(frozen=True)
class RenameMap:
    forward: Mapping[str, str]
    reserved: frozenset[str]

    def is_identity(self) -> bool:
        return all(k == v for k, v in self.forward.items())


def _identifiers() -> Iterator[str]:
    """a, b, ..., z, aa, ab, ..."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    for n in count(1):
        for i in range(26 ** n):
            chars = []
            for _ in range(n):
                i, r = divmod(i, 26)
                chars.append(letters[r])
            yield "".join(reversed(chars))


def anonymize(netlist: Netlist, reserved: Iterable[str] = DEFAULT_RESERVED) -> tuple[Netlist, RenameMap]:
    """Rename every non-reserved net to a short letter identifier.

    Identifiers are handed out in order of first appearance. An identifier that
    collides with a reserved name is skipped.
    """
    reserved_low = {r.lower() for r in reserved}
    kept = frozenset(n for n in netlist.nets if n.lower() in reserved_low)
    fresh = _identifiers()
    forward: dict[str, str] = {}
    for net in netlist.ordered_nets():
        if net in kept:
            continue
        ident = next(fresh)
        while ident in reserved_low:
            log.info("anonymize: identifier %r collides with a reserved net, skipping", ident)
            ident = next(fresh)
        forward[net] = ident
    devices = tuple(d.renamed(forward) for d in netlist.devices)
    return Netlist(devices, netlist.source_order), RenameMap(forward, kept)
