import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from analogid.netlist import (ConflictingOverride, DuplicateDevice, MalformedLine, UnknownChannel, UnknownNet,
                              anonymize, classify_nets, devices_on_net, parse_netlist, serialize_netlist)
from conftest import HL12_TEXT
from strategies import netlists


def test_parse_mosfet_line():
    (dev,) = parse_netlist("m13 a a ground ground nmos").devices
    assert dev.name == "m13" and dev.kind == "mosfet" and dev.channel == "nmos"
    assert (dev.drain, dev.gate, dev.source, dev.bulk) == ("a", "a", "ground", "ground")
    assert dev.is_diode


def test_parse_empty():
    net = parse_netlist("")
    assert len(net) == 0 and net.nets == frozenset()


def test_parse_skips_comments_and_crlf():
    net = parse_netlist("* header\r\n\r\nm1 a b c d PMOS_3v3\r\nc1 a b 1p\r\n")
    assert [d.name for d in net] == ["m1", "c1"]
    assert net.device("m1").channel == "pmos"


def test_parse_generated_code_netlist(demo_netlists):
    net = demo_netlists["demo4"]
    # the printed test netlist runs m1..m22
    assert len(net.mosfets) == 22 and len(net.capacitors) == 2


@pytest.mark.parametrize("text, exc", [
    ("m1 a b c nmos", MalformedLine),
    ("c1 a", MalformedLine),
    ("r1 a b", MalformedLine),
    ("m1 a b c d nmos\nm1 a b c d pmos", DuplicateDevice),
    ("m1 a b c d njf", UnknownChannel),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_netlist(text)


def test_malformed_line_number():
    with pytest.raises(MalformedLine) as info:
        parse_netlist("m1 a b c d nmos\n\nm2 a b")
    assert info.value.line_no == 3


def test_devices_on_net(hl12):
    got = [(d.name, role) for d, role in devices_on_net(hl12, "f")]
    # m9 is "m9 f a g g nmos": only its drain sits on f
    assert got == [("m9", "drain"), ("m11", "source"), ("m11", "bulk"), ("m12", "source"), ("m12", "bulk")]


def test_devices_on_net_unknown(hl12):
    with pytest.raises(UnknownNet):
        devices_on_net(hl12, "nowhere")


def test_devices_on_net_single_capacitor():
    net = parse_netlist("c1 out ground")
    assert [(d.name, r) for d, r in devices_on_net(net, "out")] == [("c1", "pos")]


@given(netlists())
def test_devices_on_net_exhaustive(net):
    total = sum(len(devices_on_net(net, n)) for n in net.nets)
    assert total == sum(len(d.nets) for d in net)


def test_classify_nets(hl12):
    roles = classify_nets(hl12)
    assert roles.supply == {"supply"} and roles.ground == {"ground"}
    assert roles.inputs == ("in1", "in2") and roles.outputs == ("out",)
    assert roles.bias == {"ibias"}
    assert roles.internal == set("abcdefg")


def test_classify_no_reserved_names():
    roles = classify_nets(parse_netlist("m1 a b a b nmos"))
    assert not roles.reserved and roles.internal == {"a", "b"}


def test_classify_override(hl12):
    roles = classify_nets(hl12, {"outputs": ["c"]})
    assert roles.outputs == ("c",)
    assert "out" in roles.internal


def test_classify_conflicting_override(hl12):
    with pytest.raises(ConflictingOverride):
        classify_nets(hl12, {"outputs": ["c"], "bias": ["c"]})


def test_anonymize_long_internal_name():
    net = parse_netlist("m1 out1FirstStage in1 tail tail nmos\nm2 out in2 tail tail nmos")
    anon, rename = anonymize(net)
    assert rename.forward == {"out1FirstStage": "a", "tail": "b"}
    assert anon.device("m1").drain == "a"
    assert [d.name for d in anon] == ["m1", "m2"]


def test_anonymize_all_reserved():
    net = parse_netlist("m1 out in1 ground ground nmos")
    anon, rename = anonymize(net)
    assert rename.is_identity() and anon == net


def test_anonymize_skips_reserved_identifier():
    names = " ".join(f"n{i}" for i in range(4))
    net = parse_netlist(f"m1 {names} nmos")
    anon, rename = anonymize(net, reserved={"b"})
    assert "b" not in rename.forward.values()


@given(netlists())
def test_anonymize_idempotent(net):
    once, _ = anonymize(net)
    twice, rename = anonymize(once)
    assert rename.is_identity() and twice == once


@given(netlists(), st.randoms(use_true_random=False))
def test_anonymize_is_isomorphism(net, rnd):
    anon, rename = anonymize(net)
    assert len(set(rename.forward.values())) == len(rename.forward)
    assert not set(rename.forward) & rename.reserved
    for before, after in zip(net, anon):
        assert before.name == after.name
        assert tuple(rename.forward.get(n, n) for n in before.nets) == after.nets


def test_serialize_round_trip_text(hl12):
    assert serialize_netlist(hl12).split() == HL12_TEXT.split()


def test_serialize_empty_and_single():
    assert serialize_netlist(parse_netlist("")) == ""
    assert serialize_netlist(parse_netlist("c1 out ground")) == "c1 out ground\n"


@settings(max_examples=200)
@given(netlists())
def test_serialize_round_trip(net):
    assert parse_netlist(serialize_netlist(net)) == net
