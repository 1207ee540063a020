"""Cluster-level and node-level scoring of predicted annotations.

Strict scores count a predicted instance only when some ground-truth
instance carries the same label and exactly the same component set, and
weight every instance by its device count. Node scores compare the
multisets of (device, label) pairs and ignore grouping.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .annotations import LEVEL_LABELS, LEVELS, AnnotationSet

NONE_LABEL = "<none>"


class LevelMismatch(ValueError):
    """Raised for unknown levels or labels that do not belong to the level."""


class EmptyCorpus(ValueError):
    pass


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    # raw counts, kept so corpus aggregation can micro-average
    matched_pred: int = 0
    predicted: int = 0
    matched_truth: int = 0
    truth: int = 0

    @classmethod
    def from_counts(cls, matched_pred: int, predicted: int, matched_truth: int, truth: int) -> "Scores":
        p = _ratio(matched_pred, predicted)
        r = _ratio(matched_truth, truth)
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, matched_pred, predicted, matched_truth, truth)

    def __add__(self, other: "Scores") -> "Scores":
        return Scores.from_counts(self.matched_pred + other.matched_pred, self.predicted + other.predicted,
                                  self.matched_truth + other.matched_truth, self.truth + other.truth)


def _check_level(ann: AnnotationSet, level: str, who: str) -> None:
    if level not in LEVELS:
        raise LevelMismatch(f"unknown level {level!r}")
    legal = set(LEVEL_LABELS[level])
    bad = sorted({inst.label for inst in ann.level(level)} - legal)
    if bad:
        raise LevelMismatch(f"{who} has labels {bad} that do not belong to {level}")


def strict_scores(pred: AnnotationSet, truth: AnnotationSet, level: str) -> Scores:
    _check_level(pred, level, "prediction")
    _check_level(truth, level, "ground truth")
    pending = Counter((i.label, i.components) for i in truth.level(level))
    hit_size = 0
    for inst in pred.level(level):
        key = (inst.label, inst.components)
        if pending[key] > 0:
            pending[key] -= 1
            hit_size += len(inst)
    predicted = sum(len(i) for i in pred.level(level))
    total = sum(len(i) for i in truth.level(level))
    # every matched prediction pairs with a truth instance of identical size
    return Scores.from_counts(hit_size, predicted, hit_size, total)


def _pairs(ann: AnnotationSet, level: str) -> Counter:
    return Counter((d, inst.label) for inst in ann.level(level) for d in inst.components)


def _check_universe(universe: Iterable[str] | None, *anns: AnnotationSet) -> None:
    if universe is None:
        return
    universe = set(universe)
    stray = set().union(*(a.devices() for a in anns)) - universe
    if stray:
        raise ValueError(f"devices outside the netlist: {sorted(stray)}")


def node_scores(pred: AnnotationSet, truth: AnnotationSet, level: str,
                universe: Iterable[str] | None = None) -> Scores:
    _check_level(pred, level, "prediction")
    _check_level(truth, level, "ground truth")
    _check_universe(universe, pred, truth)
    p, t = _pairs(pred, level), _pairs(truth, level)
    tp = sum((p & t).values())
    return Scores.from_counts(tp, sum(p.values()), tp, sum(t.values()))


@dataclass
class ConfusionMatrix:
    labels: list[str]
    counts: list[list[int]]

    @classmethod
    def zeros(cls, labels: Sequence[str]) -> "ConfusionMatrix":
        labels = list(labels)
        return cls(labels, [[0] * len(labels) for _ in labels])

    def add(self, truth_label: str, pred_label: str, n: int = 1) -> None:
        self.counts[self.labels.index(truth_label)][self.labels.index(pred_label)] += n

    def get(self, truth_label: str, pred_label: str) -> int:
        return self.counts[self.labels.index(truth_label)][self.labels.index(pred_label)]

    def row_sum(self, label: str) -> int:
        return sum(self.counts[self.labels.index(label)])

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise LevelMismatch("confusion matrices over different label sets")
        return ConfusionMatrix(self.labels, [[a + b for a, b in zip(r1, r2)]
                                             for r1, r2 in zip(self.counts, other.counts)])

    def format(self) -> str:
        width = max(len(l) for l in self.labels) + 2
        head = " " * width + "".join(l.rjust(width) for l in self.labels)
        rows = [l.ljust(width) + "".join(str(c).rjust(width) for c in row)
                for l, row in zip(self.labels, self.counts)]
        return "\n".join([head, *rows])


def confusion(pred: AnnotationSet, truth: AnnotationSet, level: str,
              universe: Iterable[str] | None = None) -> ConfusionMatrix:
    """Rows are ground-truth labels, columns predicted labels.

    Each (device, truth label) assignment adds exactly one count: on the
    diagonal when the device also carries that label in the prediction,
    otherwise under the first other predicted label in label order, otherwise
    under <none>. Devices predicted but absent from the truth add to the
    <none> row once per predicted label.
    """
    _check_level(pred, level, "prediction")
    _check_level(truth, level, "ground truth")
    _check_universe(universe, pred, truth)
    labels = list(LEVEL_LABELS[level])
    cm = ConfusionMatrix.zeros(labels + [NONE_LABEL])
    pred_by_dev: dict[str, set[str]] = {}
    for inst in pred.level(level):
        for d in inst.components:
            pred_by_dev.setdefault(d, set()).add(inst.label)
    truth_by_dev: dict[str, set[str]] = {}
    for inst in truth.level(level):
        for d in inst.components:
            truth_by_dev.setdefault(d, set()).add(inst.label)

    for dev, tlabels in truth_by_dev.items():
        plabels = pred_by_dev.get(dev, set())
        for t in tlabels:
            if t in plabels:
                cm.add(t, t)
                continue
            others = [l for l in labels if l in plabels]
            cm.add(t, others[0] if others else NONE_LABEL)
    for dev, plabels in pred_by_dev.items():
        if dev not in truth_by_dev:
            for p in plabels:
                cm.add(NONE_LABEL, p)
    return cm


@dataclass
class LevelReport:
    strict: Scores
    node: Scores
    mean_strict_f1: float
    mean_node_f1: float
    netlists: int
    confusion: ConfusionMatrix | None = None


@dataclass
class EvalReport:
    levels: dict[str, LevelReport]
    breakdown: dict[str, dict[str, tuple[Scores, Scores]]] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"levels": {}, "netlists": {}}
        for lvl, rep in self.levels.items():
            entry = {
                "strict": asdict(rep.strict),
                "node": asdict(rep.node),
                "mean_strict_f1": rep.mean_strict_f1,
                "mean_node_f1": rep.mean_node_f1,
                "netlists": rep.netlists,
            }
            if rep.confusion is not None:
                entry["confusion"] = {"labels": rep.confusion.labels, "counts": rep.confusion.counts}
            out["levels"][lvl] = entry
        for nid, per in self.breakdown.items():
            out["netlists"][nid] = {lvl: {"strict": asdict(s), "node": asdict(n)} for lvl, (s, n) in per.items()}
        return out

    def format_table(self) -> str:
        cols = ("PR_strict", "RC_strict", "F1_strict", "PR_node", "RC_node", "F1_node", "meanF1_strict")
        lines = ["level  " + "  ".join(f"{c:>13}" for c in cols)]
        for lvl, rep in self.levels.items():
            vals = (rep.strict.precision, rep.strict.recall, rep.strict.f1,
                    rep.node.precision, rep.node.recall, rep.node.f1, rep.mean_strict_f1)
            lines.append(f"{lvl:<5}  " + "  ".join(f"{v:>13.3f}" for v in vals))
        return "\n".join(lines)


def aggregate(per_netlist: Sequence[tuple[str, str, Scores, Scores]],
              confusions: dict[str, ConfusionMatrix] | None = None) -> EvalReport:
    """Fold per-netlist (id, level, strict, node) rows into a corpus report.

    Corpus ratios are micro-averaged over the raw counts; the unweighted mean
    of per-netlist F1 is reported alongside.
    """
    if not per_netlist:
        raise EmptyCorpus("no netlists to aggregate")
    by_level: dict[str, list[tuple[Scores, Scores]]] = {}
    breakdown: dict[str, dict[str, tuple[Scores, Scores]]] = {}
    for nid, level, strict, node in per_netlist:
        if level in breakdown.get(nid, {}):
            raise ValueError(f"netlist {nid!r} scored twice at {level}")
        breakdown.setdefault(nid, {})[level] = (strict, node)
        by_level.setdefault(level, []).append((strict, node))
    levels = {}
    for lvl in sorted(by_level, key=lambda l: (LEVELS.index(l) if l in LEVELS else len(LEVELS), l)):
        rows = by_level[lvl]
        strict = sum((s for s, _ in rows[1:]), rows[0][0])
        node = sum((n for _, n in rows[1:]), rows[0][1])
        levels[lvl] = LevelReport(
            strict=strict, node=node,
            mean_strict_f1=sum(s.f1 for s, _ in rows) / len(rows),
            mean_node_f1=sum(n.f1 for _, n in rows) / len(rows),
            netlists=len(rows),
            confusion=(confusions or {}).get(lvl),
        )
    return EvalReport(levels, breakdown)


def evaluate_corpus(items: Iterable[tuple[str, AnnotationSet, AnnotationSet, Iterable[str] | None]],
                    levels: Sequence[str]) -> EvalReport:
    """Score (id, prediction, truth, universe) items at each requested level."""
    rows = []
    confusions: dict[str, ConfusionMatrix] = {}
    for nid, pred, truth, universe in items:
        universe = set(universe) if universe is not None else None
        for lvl in levels:
            rows.append((nid, lvl, strict_scores(pred, truth, lvl), node_scores(pred, truth, lvl, universe)))
            cm = confusion(pred, truth, lvl, universe)
            confusions[lvl] = confusions[lvl] + cm if lvl in confusions else cm
    return aggregate(rows, confusions)
