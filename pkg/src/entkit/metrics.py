"""Mention-level, hard entity-level, and soft entity-level precision/recall/F1.

All three levels share one labeled view of a (gold, predicted) document pair.
For NER the unit of labeling is the entity cluster and its instances are the
member mention spans. For relation extraction the unit is a directed, typed
cluster pair and its instances are all cross-product mention pairs of the two
clusters.

Levels:
  mention  - micro P/R/F1 over labeled instances, so frequently mentioned
             entities dominate.
  hard     - a labeled cluster counts only when some gold cluster carries the
             same label with the identical instance set (all-or-nothing).
  soft     - each labeled cluster earns the fraction of its instances that are
             correctly labeled on the other side; the per-label identities
             tp_p + fp = #predicted clusters with that label and
             tp_g + fn = #gold clusters with that label hold exactly.

Zero-denominator convention at every level: a side with an empty denominator
scores 1.0 when the other side is also empty (perfect on empty documents) and
0.0 otherwise. Micro-averaging across labels and documents throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .corpus import Document

TASKS = ("ner", "re")
LEVELS = ("mention", "hard", "soft")


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PRFReport:
    precision: float
    recall: float
    f1: float
    level: str | None = None
    task: str | None = None

    @classmethod
    def from_pr(cls, precision: float, recall: float,
                level: str | None = None, task: str | None = None) -> "PRFReport":
        return cls(precision, recall, f1_score(precision, recall), level, task)


@dataclass
class LabelView:
    """Per-label cluster units and instance sets for one document pair.

    Instances are mention spans for NER and ordered mention-pair tuples for
    relation extraction; each cluster unit is the frozen set of its instances.
    """

    pred_clusters: list[frozenset] = field(default_factory=list)
    gold_clusters: list[frozenset] = field(default_factory=list)

    @property
    def pred_instances(self) -> frozenset:
        out: set = set()
        for c in self.pred_clusters:
            out |= c
        return frozenset(out)

    @property
    def gold_instances(self) -> frozenset:
        out: set = set()
        for c in self.gold_clusters:
            out |= c
        return frozenset(out)


@dataclass
class EvalView:
    task: str
    labels: dict[str, LabelView] = field(default_factory=dict)

    def label_view(self, label: str) -> LabelView:
        return self.labels.setdefault(label, LabelView())


def build_eval_view(gold: Document, pred: Document, task: str) -> EvalView:
    """Index a document pair per label; gold and pred must share the token space."""
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    if gold.tokens != pred.tokens:
        raise ValueError(f"token-space mismatch between gold {gold.id!r} "
                         f"and pred {pred.id!r}")
    view = EvalView(task)
    if task == "ner":
        for side, doc in (("gold", gold), ("pred", pred)):
            for c in doc.clusters:
                instances = frozenset((m.begin, m.end) for m in c.mentions)
                for label in c.tags:
                    lv = view.label_view(label)
                    (lv.gold_clusters if side == "gold" else lv.pred_clusters
                     ).append(instances)
    else:
        for side, doc in (("gold", gold), ("pred", pred)):
            by_id = doc.cluster_by_id()
            for head_id, label, tail_id in sorted(
                    {(r.head, r.type, r.tail) for r in doc.relations}):
                if head_id not in by_id or tail_id not in by_id:
                    raise ValueError(f"{doc.id}: relation {label!r} references "
                                     f"a missing cluster id")
                head, tail = by_id[head_id], by_id[tail_id]
                instances = frozenset(
                    ((hm.begin, hm.end), (tm.begin, tm.end))
                    for hm in head.mentions for tm in tail.mentions)
                lv = view.label_view(label)
                (lv.gold_clusters if side == "gold" else lv.pred_clusters
                 ).append(instances)
    return view


def _as_views(view_or_views: EvalView | Iterable[EvalView]) -> list[EvalView]:
    if isinstance(view_or_views, EvalView):
        return [view_or_views]
    views = list(view_or_views)
    tasks = {v.task for v in views}
    if len(tasks) > 1:
        raise ValueError(f"cannot mix tasks {sorted(tasks)} in one score")
    return views


def _ratio(num: float, den: float, other_empty_den: float) -> float:
    """num/den with the empty-side convention for den == 0."""
    if den == 0:
        return 1.0 if other_empty_den == 0 else 0.0
    return num / den


# --------------------------------------------------------------------------
# Mention level


def mention_counts(view: EvalView) -> dict[str, tuple[int, int, int]]:
    """Per-label (tp, fp, fn) over labeled instances."""
    out = {}
    for label, lv in view.labels.items():
        p, g = lv.pred_instances, lv.gold_instances
        out[label] = (len(p & g), len(p - g), len(g - p))
    return out


def mention_prf(view_or_views: EvalView | Iterable[EvalView]) -> PRFReport:
    views = _as_views(view_or_views)
    tp = fp = fn = 0
    for view in views:
        for label_tp, label_fp, label_fn in mention_counts(view).values():
            tp += label_tp
            fp += label_fp
            fn += label_fn
    precision = _ratio(tp, tp + fp, tp + fn)
    recall = _ratio(tp, tp + fn, tp + fp)
    task = views[0].task if views else None
    return PRFReport.from_pr(precision, recall, "mention", task)


# --------------------------------------------------------------------------
# Hard entity level


def hard_counts(view: EvalView) -> dict[str, tuple[int, int, int]]:
    """Per-label (tp, #pred clusters, #gold clusters); a predicted cluster is
    a true positive only on an exact instance-set match with a gold cluster
    bearing the same label."""
    out = {}
    for label, lv in view.labels.items():
        gold_sets = set(lv.gold_clusters)
        tp = sum(1 for c in lv.pred_clusters if c in gold_sets)
        out[label] = (tp, len(lv.pred_clusters), len(lv.gold_clusters))
    return out


def hard_entity_prf(view_or_views: EvalView | Iterable[EvalView]) -> PRFReport:
    views = _as_views(view_or_views)
    tp = n_pred = n_gold = 0
    for view in views:
        for label_tp, label_pred, label_gold in hard_counts(view).values():
            tp += label_tp
            n_pred += label_pred
            n_gold += label_gold
    precision = _ratio(tp, n_pred, n_gold)
    recall = _ratio(tp, n_gold, n_pred)
    task = views[0].task if views else None
    return PRFReport.from_pr(precision, recall, "hard", task)


# --------------------------------------------------------------------------
# Soft entity level


@dataclass(frozen=True)
class SoftCounts:
    tp_p: float
    tp_g: float
    fp: float
    fn: float

    @property
    def n_pred(self) -> float:
        return self.tp_p + self.fp

    @property
    def n_gold(self) -> float:
        return self.tp_g + self.fn


def soft_entity_counts(view: EvalView, label: str) -> SoftCounts:
    """Size-weighted true positives for one label.

    tp_p sums, over predicted clusters with the label, the fraction of each
    cluster's instances found among the gold instances of that label; tp_g is
    the mirror image over gold clusters. fp and fn are the cluster counts
    minus the respective weighted true positives.
    """
    lv = view.labels.get(label, LabelView())
    gold_instances = lv.gold_instances
    pred_instances = lv.pred_instances
    tp_p = sum(len(c & gold_instances) / len(c) for c in lv.pred_clusters)
    tp_g = sum(len(c & pred_instances) / len(c) for c in lv.gold_clusters)
    return SoftCounts(tp_p, tp_g,
                      len(lv.pred_clusters) - tp_p,
                      len(lv.gold_clusters) - tp_g)


def soft_entity_prf(view_or_views: EvalView | Iterable[EvalView]) -> PRFReport:
    views = _as_views(view_or_views)
    tp_p = tp_g = n_pred = n_gold = 0.0
    for view in views:
        for label in view.labels:
            c = soft_entity_counts(view, label)
            tp_p += c.tp_p
            tp_g += c.tp_g
            n_pred += c.n_pred
            n_gold += c.n_gold
    precision = _ratio(tp_p, n_pred, n_gold)
    recall = _ratio(tp_g, n_gold, n_pred)
    task = views[0].task if views else None
    return PRFReport.from_pr(precision, recall, "soft", task)


def score_level(view_or_views: EvalView | Iterable[EvalView], level: str) -> PRFReport:
    if level == "mention":
        return mention_prf(view_or_views)
    if level == "hard":
        return hard_entity_prf(view_or_views)
    if level == "soft":
        return soft_entity_prf(view_or_views)
    raise ValueError(f"level must be one of {LEVELS}, got {level!r}")


def per_label_prf(view_or_views: EvalView | Iterable[EvalView],
                  level: str) -> dict[str, PRFReport]:
    """The chosen level restricted to each label separately."""
    views = _as_views(view_or_views)
    labels = sorted({l for v in views for l in v.labels})
    out = {}
    for label in labels:
        restricted = [EvalView(v.task, {label: v.labels[label]})
                      for v in views if label in v.labels]
        out[label] = score_level(restricted, level)
    return out
