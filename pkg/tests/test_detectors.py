import pytest
from hypothesis import given, settings

from analogid.annotations import HL1, HL2, HL3
from analogid.detectors import (TooLarge, brute_force_cm_oracle, detect_capacitor_roles, detect_current_mirrors,
                                detect_diff_pairs, detect_diode_connected, detect_hl1, detect_hl2, detect_hl3,
                                detect_inverters, identify)
from analogid.netlist import anonymize, classify_nets, parse_netlist
from strategies import netlists


def s(*names):
    return frozenset(names)


def comps(instances, label=None):
    return {i.components for i in instances if label is None or i.label == label}


def roles_of(net):
    return classify_nets(net)


# ---- HL1 ----

def test_diodes_hl12(hl12):
    (inst,) = detect_diode_connected(hl12)
    assert inst.label == "MosfetDiode" and inst.components == s("m13", "m14", "m15")


def test_diodes_code_generation_case(demo_netlists):
    assert comps(detect_diode_connected(demo_netlists["demo3"])) == {s("m2", "m3", "m17", "m18")}


def test_no_diodes():
    assert detect_diode_connected(parse_netlist("m1 a b c c nmos")) == []


def test_capacitor_roles_hl12(hl12):
    caps = detect_capacitor_roles(hl12, roles_of(hl12))
    assert comps(caps, "load_cap") == {s("c1")} and comps(caps, "compensation_cap") == set()


def test_capacitor_roles_generated_code(demo_netlists):
    net = demo_netlists["demo4"]
    caps = detect_capacitor_roles(net, roles_of(net))
    assert comps(caps, "load_cap") == {s("c2")}
    assert comps(caps, "compensation_cap") == {s("c1")}


def test_capacitor_between_internal_nets_is_compensation():
    net = parse_netlist("c1 a b\nc2 out supply")
    caps = detect_capacitor_roles(net, roles_of(net))
    assert comps(caps, "compensation_cap") == {s("c1")} and comps(caps, "load_cap") == {s("c2")}


def test_capacitor_free():
    net = parse_netlist("m1 a a ground ground nmos")
    assert detect_capacitor_roles(net, roles_of(net)) == []


def test_hl1_one_instance_per_label(demo_netlists):
    for net in demo_netlists.values():
        labels = [i.label for i in detect_hl1(net, roles_of(net)).level(HL1)]
        assert len(labels) == len(set(labels))


# ---- current mirrors ----

def test_cm_hl12(hl12):
    assert comps(detect_current_mirrors(hl12)) == {s("m3", "m4", "m5", "m6"), s("m1", "m2", "m7", "m8", "m15"),
                                                   s("m10", "m14")}


def test_cm_generated_code(demo_netlists):
    assert comps(detect_current_mirrors(demo_netlists["demo4"])) == {
        s("m15", "m16", "m20", "m21"), s("m7", "m8", "m9", "m10"), s("m1", "m2", "m3", "m11", "m18"), s("m4", "m19")}


def test_cm_minimal():
    net = parse_netlist("m1 g g ground ground nmos\nm2 x g ground ground nmos")
    assert comps(detect_current_mirrors(net)) == {s("m1", "m2")}


def test_cm_needs_diode():
    net = parse_netlist("m1 y g ground ground nmos\nm2 x g ground ground nmos")
    assert detect_current_mirrors(net) == []


def test_cm_does_not_mix_channels():
    net = parse_netlist("m1 g g ground ground nmos\nm2 x g ground ground pmos")
    assert detect_current_mirrors(net) == []


# ---- differential pairs ----

def test_diffpair_hl12(hl12):
    assert comps(detect_diff_pairs(hl12, roles_of(hl12))) == {s("m11", "m12")}


def test_diffpair_hl3_prompt(demo_netlists):
    net = demo_netlists["demo2"]
    assert comps(detect_diff_pairs(net, roles_of(net))) == {s("m7", "m8")}


def test_diffpair_single_input():
    net = parse_netlist("m1 a in1 t t nmos\nm2 b in1 t t nmos")
    assert detect_diff_pairs(net, roles_of(net)) == []


def test_diffpair_cascoded_feed():
    net = parse_netlist("m1 a in1 t t nmos\nm2 b in2 t t nmos\nm3 t cb ground ground nmos\n"
                        "m4 t cb ground ground nmos")
    assert comps(detect_diff_pairs(net, roles_of(net))) == {s("m1", "m2", "m3", "m4")}


# ---- inverters ----

def test_inverter_prompt5_fragment():
    net = parse_netlist("m3 out b supply supply pmos\nm6 out a e e nmos\nm7 e d ground ground nmos")
    assert comps(detect_inverters(net, roles_of(net))) == {s("m3", "m6", "m7")}


def test_inverter_pmos_only():
    net = parse_netlist("m1 out a supply supply pmos\nm2 out b supply supply pmos")
    assert detect_inverters(net, roles_of(net)) == []


def test_two_independent_inverters():
    net = parse_netlist("m1 x a supply supply pmos\nm2 x a ground ground nmos\n"
                        "m3 y b supply supply pmos\nm4 y b ground ground nmos")
    got = comps(detect_inverters(net, roles_of(net)))
    assert got == {s("m1", "m2"), s("m3", "m4")}


def test_inverter_rejects_bias_gates():
    net = parse_netlist("m1 x ibias supply supply pmos\nm2 x vbias ground ground nmos")
    assert detect_inverters(net, roles_of(net)) == []


# ---- HL2 union ----

def test_hl2_hl12(hl12):
    hl2 = detect_hl2(hl12, roles_of(hl12)).level(HL2)
    assert sorted(i.label for i in hl2) == ["CM", "CM", "CM", "DiffPair"]
    assert comps(hl2, "DiffPair") == {s("m11", "m12")}


def test_hl2_generated_code(demo_netlists):
    net = demo_netlists["demo4"]
    hl2 = detect_hl2(net, roles_of(net)).level(HL2)
    assert len(comps(hl2, "CM")) == 4
    assert comps(hl2, "DiffPair") == {s("m12", "m13")}
    # m14 pulls out down, m15 over m16 pulls it up; the rule finds this inverter too
    assert comps(hl2, "Inverter") == {s("m14", "m15", "m16")}


def test_hl2_empty():
    net = parse_netlist("")
    assert detect_hl2(net, roles_of(net)).is_empty()


# ---- HL3 ----

def hl3_of(net):
    roles = roles_of(net)
    return {i.label: i.components for i in detect_hl3(net, roles, detect_hl2(net, roles)).level(HL3)}


def test_hl3_prompt(demo_netlists):
    got = hl3_of(demo_netlists["demo2"])
    assert got == {"firstStage": s("m7", "m8"), "secondStage": s("m11"), "loadPart": s("m2", "m3", "m4"),
                   "biasPart": s("m1", "m5", "m6", "m9", "m10", "m12", "m13", "m14", "m15")}


def test_hl3_prompt5(demo_netlists):
    got = hl3_of(demo_netlists["demo5"])
    assert got["firstStage"] == s("m9", "m10")
    assert got["loadPart"] == s("m2", "m3")


def test_hl3_three_stage_with_feedback(demo_netlists):
    got = hl3_of(demo_netlists["demo6"])
    assert got["thirdStage"] == s("m9") and got["feedBack"] == s("m13")


def test_hl3_no_inputs():
    net = parse_netlist("m1 a a ground ground nmos\nm2 out a ground ground nmos")
    assert hl3_of(net) == {}


def test_hl3_two_stage_disjoint():
    net = parse_netlist("m1 d1 in1 t t nmos\nm2 d2 in2 t t nmos\nm3 t ibias ground ground nmos\n"
                        "m4 d1 d1 supply supply pmos\nm5 d2 d1 supply supply pmos\n"
                        "m6 out d2 supply supply pmos\nm7 out ibias ground ground nmos")
    got = hl3_of(net)
    assert got["firstStage"] == s("m1", "m2") and got["secondStage"] == s("m6")
    assert not got["firstStage"] & got["secondStage"]


# ---- oracle ----

def test_oracle_hl12(hl12):
    assert comps(brute_force_cm_oracle(hl12)) == comps(detect_current_mirrors(hl12))


def test_oracle_limits():
    assert brute_force_cm_oracle(parse_netlist("")) == []
    assert brute_force_cm_oracle(parse_netlist("m1 a a ground ground nmos")) == []
    big = parse_netlist("\n".join(f"m{i} a a ground ground nmos" for i in range(17)))
    with pytest.raises(TooLarge):
        brute_force_cm_oracle(big)


@settings(max_examples=300, deadline=None)
@given(netlists(max_devices=12))
def test_oracle_equivalence(net):
    assert comps(detect_current_mirrors(net)) == comps(brute_force_cm_oracle(net))


# ---- invariants ----

@given(netlists())
def test_deterministic(net):
    assert identify(net) == identify(net)


@settings(deadline=None)
@given(netlists())
def test_name_independence(net):
    # rename every internal net to something long, then back to short letters
    roles = roles_of(net)
    long_names = {n: f"node_{n}_x" for n in roles.internal}
    renamed = parse_netlist("\n".join(
        " ".join([d.name, *(long_names.get(n, n) for n in d.nets)] + ([d.channel] if d.is_mosfet else []))
        for d in net))
    assert identify(renamed) == identify(net)
    assert identify(anonymize(renamed)[0]) == identify(net)


@given(netlists())
def test_channel_purity(net):
    hl2 = detect_hl2(net, roles_of(net)).level(HL2)
    for inst in hl2:
        channels = {net.device(n).channel for n in inst.components}
        if inst.label in ("CM", "DiffPair"):
            assert len(channels) == 1
        else:
            assert channels == {"nmos", "pmos"}


@given(netlists())
def test_merge_closure(net):
    diodes = {d.name for d in net.mosfets if d.is_diode}
    cms = [i.components for i in detect_current_mirrors(net)]
    for i, a in enumerate(cms):
        for b in cms[i + 1:]:
            assert not (a & b & diodes)


@given(netlists())
def test_stage_disjointness(net):
    got = hl3_of(net)
    stages = [got.get(k, frozenset()) for k in ("firstStage", "secondStage", "thirdStage")]
    assert not (stages[0] & stages[1]) and not (stages[0] & stages[2]) and not (stages[1] & stages[2])
