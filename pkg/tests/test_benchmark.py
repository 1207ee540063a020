import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from analogid.annotations import HL1, HL2, LEVEL_LABELS, AnnotationSet, SubcircuitInstance
from analogid.benchmark import (LARGE, MEDIUM, SMALL, TAXONOMY, BenchmarkEntry, EmptyCorpus, MalformedDocument,
                                UnknownLabel, canonicalize, corpus_stats, dump_labels, load_corpus, load_labels,
                                merge_shared_diode_cms, size_bucket)
from analogid.netlist import parse_netlist


def inst(label, *names):
    return SubcircuitInstance(label, frozenset(names))


def test_load_single_cm():
    ann = load_labels('[{"sub_circuit_name":"CM","components":["m4","m19"]}]')
    assert ann.level(HL2) == (inst("CM", "m4", "m19"),)


def test_load_empty():
    assert load_labels("[]").is_empty()
    assert load_labels("").is_empty()


def test_load_variant_then_canonicalize():
    ann = load_labels('[{"sub_circuit_name":"MosfetWilsonCurrentMirror","components":["m1","m2","m3"]}]')
    assert ann.level(HL2)[0].label == "MosfetWilsonCurrentMirror"
    assert canonicalize(ann).level(HL2) == (inst("CM", "m1", "m2", "m3"),)


def test_load_errors():
    with pytest.raises(UnknownLabel):
        load_labels('[{"sub_circuit_name":"Bandgap","components":["m1"]}]')
    with pytest.raises(MalformedDocument):
        load_labels("{not json")
    with pytest.raises(MalformedDocument):
        load_labels('[{"sub_circuit_name":"CM"}]')
    with pytest.raises(MalformedDocument):
        load_labels('[{"sub_circuit_name":"CM","components":["m1","m2"]}]', level=HL1)


def test_taxonomy_is_total():
    assert len(TAXONOMY) == 27
    legal = {l for labels in LEVEL_LABELS.values() for l in labels}
    assert set(TAXONOMY.values()) <= legal
    assert TAXONOMY["MosfetCascodeCurrentMirror"] == "CM"
    assert TAXONOMY["MosfetFoldedCascodeDifferentialPair"] == "DiffPair"
    assert TAXONOMY["MosfetCascodedAnalogInverter"] == "Inverter"
    assert TAXONOMY["MosfetDiodeArray"] == "MosfetDiode"


def test_canonicalize_examples():
    variant = AnnotationSet.single(HL2, [inst("MosfetSimpleCurrentMirror", "m1", "m2")])
    assert canonicalize(variant) == AnnotationSet.single(HL2, [inst("CM", "m1", "m2")])
    canon = AnnotationSet.single(HL2, [inst("CM", "m1", "m2"), inst("DiffPair", "m3", "m4")])
    assert canonicalize(canon) == canon
    two = AnnotationSet.single(HL2, [inst("MosfetSimpleCurrentMirror", "m1", "m2"),
                                     inst("MosfetCascodeCurrentMirror", "m1", "m2")])
    assert canonicalize(two).level(HL2) == (inst("CM", "m1", "m2"),)


MERGE_NET = parse_netlist("m1 a a ground ground nmos\nm2 b a ground ground nmos\nm3 c a ground ground nmos\n"
                          "m4 d e ground ground nmos\nm5 f e ground ground nmos")


def test_merge_on_shared_diode():
    truth = AnnotationSet.single(HL2, [inst("CM", "m1", "m2"), inst("CM", "m1", "m3")])
    assert merge_shared_diode_cms(truth, MERGE_NET).level(HL2) == (inst("CM", "m1", "m2", "m3"),)


def test_merge_leaves_disjoint_and_non_diode_sharing():
    disjoint = AnnotationSet.single(HL2, [inst("CM", "m1", "m2"), inst("CM", "m4", "m5")])
    assert merge_shared_diode_cms(disjoint, MERGE_NET) == disjoint
    shared = AnnotationSet.single(HL2, [inst("CM", "m2", "m3"), inst("CM", "m2", "m4")])
    assert merge_shared_diode_cms(shared, MERGE_NET) == shared


def test_merge_never_crosses_labels():
    truth = AnnotationSet.single(HL2, [inst("CM", "m1", "m2"), inst("DiffPair", "m1", "m3")])
    assert merge_shared_diode_cms(truth, MERGE_NET) == truth


cm_sets = st.lists(st.sets(st.sampled_from(["m1", "m2", "m3", "m4", "m5"]), min_size=2, max_size=3), max_size=4)


@given(cm_sets)
def test_merge_idempotent_and_covering(groups):
    truth = AnnotationSet.single(HL2, [inst("CM", *g) for g in groups])
    once = merge_shared_diode_cms(truth, MERGE_NET)
    assert merge_shared_diode_cms(once, MERGE_NET) == once
    assert once.devices(HL2) == truth.devices(HL2)


@given(cm_sets)
def test_canonicalize_idempotent(groups):
    truth = AnnotationSet.single(HL2, [inst("MosfetSimpleCurrentMirror", *g) for g in groups])
    once = canonicalize(truth)
    assert canonicalize(once) == once


def mos_netlist(n):
    return parse_netlist("\n".join(f"m{i} a b c d nmos" for i in range(n)) + "\nc1 a b")


@pytest.mark.parametrize("n, bucket", [(15, SMALL), (19, SMALL), (20, MEDIUM), (30, MEDIUM), (31, LARGE)])
def test_size_bucket(n, bucket):
    assert size_bucket(mos_netlist(n)) == bucket


def test_bucket_of_hl12(hl12):
    assert size_bucket(hl12) == SMALL


def test_stats_single_entry():
    entry = BenchmarkEntry("x", mos_netlist(2), AnnotationSet.single(HL2, [inst("CM", "m0", "m1")]))
    stats = corpus_stats([entry])
    assert stats.instances["CM"] == 1 and stats.circuits["CM"] == 1 and stats.total == 1


def test_stats_demos_cover_every_label(demo_entries):
    stats = corpus_stats(demo_entries.values())
    for labels in LEVEL_LABELS.values():
        for label in labels:
            assert stats.circuits[label] >= 1, label
    assert "#instances" in stats.format()


def test_stats_duplicates_double(demo_entries):
    entries = list(demo_entries.values())
    once, twice = corpus_stats(entries), corpus_stats(entries + entries)
    assert all(twice.instances[k] == 2 * v for k, v in once.instances.items())
    assert all(twice.circuits[k] == 2 * v for k, v in once.circuits.items())
    assert sum(twice.buckets.values()) == twice.total == 2 * once.total


def test_stats_empty():
    with pytest.raises(EmptyCorpus):
        corpus_stats([])


def test_dump_load_round_trip(demo_entries):
    for entry in demo_entries.values():
        assert load_labels(dump_labels(entry.truth)) == entry.truth


def test_demo_corpus_is_clean(demo_entries):
    assert len(demo_entries) == 6
    assert all(not e.warnings for e in demo_entries.values())


def test_channel_violation_warns(tmp_path):
    (tmp_path / "x.sp").write_text("m1 a a ground ground nmos\nm2 b a supply supply pmos\n")
    (tmp_path / "x.hl2").write_text(json.dumps([{"sub_circuit_name": "CM", "components": ["m1", "m2"]}]))
    (entry,) = load_corpus(tmp_path)
    assert any("channel purity" in w for w in entry.warnings)
