import pytest
from hypothesis import given
from hypothesis import strategies as st

from analogid.annotations import HL2, HL3, AnnotationSet, SubcircuitInstance
from analogid.metrics import (NONE_LABEL, EmptyCorpus, LevelMismatch, Scores, aggregate, confusion,
                              evaluate_corpus, node_scores, strict_scores)

DEVICES = [f"m{i}" for i in range(1, 9)]


def inst(label, *names):
    return SubcircuitInstance(label, frozenset(names))


def hl2(*instances):
    return AnnotationSet.single(HL2, instances)


def chunks(prefix, sizes):
    out, k = [], 0
    for n in sizes:
        out.append(inst("CM", *(f"{prefix}{k + j}" for j in range(n))))
        k += n
    return out


def test_three_exact_clusters_of_twelve():
    truth = chunks("m", [3, 3, 2, 4])
    got = strict_scores(hl2(*truth[:3]), hl2(*truth), HL2)
    assert got.precision == 1.0 and got.recall == pytest.approx(8 / 12, abs=1e-9)
    node = node_scores(hl2(*truth[:3]), hl2(*truth), HL2)
    assert (node.precision, node.recall) == (got.precision, got.recall)


def test_one_single_device_hit():
    truth = chunks("m", [1, 11])
    pred = [truth[0], inst("CM", *(f"m{i}" for i in range(1, 8)))]
    got = strict_scores(hl2(*pred), hl2(*truth), HL2)
    assert got.precision == pytest.approx(0.125, abs=1e-9) and got.recall == pytest.approx(1 / 12, abs=1e-9)


def test_identity_scores():
    truth = hl2(inst("CM", "m1", "m2"), inst("DiffPair", "m3", "m4"))
    for fn in (strict_scores, node_scores):
        got = fn(truth, truth, HL2)
        assert (got.precision, got.recall, got.f1) == (1.0, 1.0, 1.0)


def test_empty_prediction():
    got = node_scores(hl2(), hl2(inst("CM", "m1", "m2")), HL2)
    assert (got.precision, got.recall, got.f1) == (0.0, 0.0, 0.0)


def test_level_mismatch():
    with pytest.raises(LevelMismatch):
        strict_scores(hl2(), hl2(), "HL9")
    bad = AnnotationSet({HL3: (inst("CM", "m1", "m2"),)})
    with pytest.raises(LevelMismatch):
        node_scores(bad, bad, HL3)


def test_universe_check():
    truth = hl2(inst("CM", "m1", "m2"))
    with pytest.raises(ValueError):
        node_scores(truth, truth, HL2, universe={"m1"})


def test_confusion_diagonal():
    truth = hl2(inst("CM", "m1", "m2"), inst("Inverter", "m3", "m4"))
    cm = confusion(truth, truth, HL2)
    assert cm.get("CM", "CM") == 2 and cm.get("Inverter", "Inverter") == 2
    assert sum(map(sum, cm.counts)) == 4


def test_confusion_none_column():
    cm = confusion(hl2(), hl2(inst("CM", "m1")), HL2)
    assert cm.get("CM", NONE_LABEL) == 1


def test_confusion_misclassification():
    cm = confusion(hl2(inst("CM", "m1")), hl2(inst("Inverter", "m1")), HL2)
    assert cm.get("Inverter", "CM") == 1


def test_confusion_prediction_only_device():
    cm = confusion(hl2(inst("CM", "m9")), hl2(inst("CM", "m1")), HL2)
    assert cm.get(NONE_LABEL, "CM") == 1 and cm.get("CM", NONE_LABEL) == 1


def test_aggregate_single():
    sc = Scores.from_counts(2, 4, 2, 3)
    rep = aggregate([("n1", HL2, sc, sc)])
    assert rep.levels[HL2].strict == sc and set(rep.breakdown) == {"n1"}


def test_aggregate_micro_average():
    good, bad = Scores.from_counts(4, 4, 4, 4), Scores.from_counts(0, 4, 0, 4)
    rep = aggregate([("a", HL2, good, good), ("b", HL2, bad, bad)])
    assert rep.levels[HL2].strict.precision == 0.5 and rep.levels[HL2].strict.recall == 0.5
    assert rep.levels[HL2].mean_strict_f1 == 0.5


def test_aggregate_perfect_corpus():
    truth = hl2(inst("CM", "m1", "m2"))
    rep = evaluate_corpus([("a", truth, truth, None), ("b", truth, truth, None)], [HL2])
    lvl = rep.levels[HL2]
    assert (lvl.strict.f1, lvl.node.f1, lvl.mean_strict_f1) == (1.0, 1.0, 1.0)
    assert "F1_strict" in rep.format_table()
    assert rep.to_json()["levels"][HL2]["netlists"] == 2


def test_aggregate_empty():
    with pytest.raises(EmptyCorpus):
        aggregate([])


labels = st.sampled_from(["CM", "DiffPair", "Inverter"])
instance = st.builds(lambda l, c: inst(l, *c), labels, st.sets(st.sampled_from(DEVICES), min_size=1, max_size=4))
annotations = st.lists(instance, max_size=5).map(lambda xs: hl2(*xs))


@given(annotations, annotations)
def test_bounds(pred, truth):
    for fn in (strict_scores, node_scores):
        sc = fn(pred, truth, HL2)
        for v in (sc.precision, sc.recall, sc.f1):
            assert 0.0 <= v <= 1.0
        assert sc.f1 <= 2 * min(sc.precision, sc.recall) + 1e-12


@given(annotations, annotations)
def test_strict_not_above_node(pred, truth):
    a, b = strict_scores(pred, truth, HL2), node_scores(pred, truth, HL2)
    assert a.precision <= b.precision + 1e-12 and a.recall <= b.recall + 1e-12


@given(annotations, annotations, st.randoms(use_true_random=False))
def test_permutation_invariance(pred, truth, rnd):
    shuffled = list(pred.level(HL2))
    rnd.shuffle(shuffled)
    again = hl2(*shuffled)
    for fn in (strict_scores, node_scores):
        assert fn(again, truth, HL2) == fn(pred, truth, HL2)


@given(annotations, annotations, annotations)
def test_confusion_row_sums_fixed_by_truth(pred_a, pred_b, truth):
    a, b = confusion(pred_a, truth, HL2), confusion(pred_b, truth, HL2)
    for label in ("CM", "DiffPair", "Inverter"):
        assert a.row_sum(label) == b.row_sum(label)
        assigned = sum(1 for i in truth.level(HL2) if i.label == label for _ in i.components)
        assert a.row_sum(label) <= assigned
