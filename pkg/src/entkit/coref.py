"""Coreference partition scoring with explicit singleton handling.

Three established metrics over a gold and a predicted partition of mention
universes that need not coincide (end-to-end setting: predicted spans may not
match gold spans):

  muc      - link-based: counts the cluster merges needed on one side to cover
             the other. Blind to singletons; degenerate denominators give 0.
  b_cubed  - per-mention overlap fractions averaged over each side's mentions;
             a mention absent from the other side contributes 0 there.
  ceaf_e   - maximum-weight one-to-one cluster alignment under the similarity
             phi(K, R) = 2|K n R| / (|K| + |R|), solved exactly.

`avg_coref_f1` is the arithmetic mean of the three F1 values. The 0/0 -> 0
convention applies throughout (never 0/0 -> 1), matching the behavior of the
standard reference scorer on degenerate partitions.
"""

from __future__ import annotations

import math
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import Document
from .metrics import PRFReport

Cluster = frozenset
Partition = tuple[Cluster, ...]


def make_partition(clusters: Iterable[Iterable[Hashable]]) -> Partition:
    """Freeze and check a clustering: clusters non-empty and pairwise disjoint."""
    out = []
    seen: set = set()
    for cluster in clusters:
        c = frozenset(cluster)
        if not c:
            raise ValueError("empty cluster in partition")
        if seen & c:
            raise ValueError(f"clusters overlap on {sorted(seen & c)[:3]}")
        seen |= c
        out.append(c)
    return tuple(out)


def partition_from_document(d: Document, namespace: str | None = None) -> Partition:
    """Cluster the document's mention spans; `namespace` prefixes every
    mention so partitions of different documents can be unioned."""
    clusters = []
    for c in d.clusters:
        if namespace is None:
            clusters.append([(m.begin, m.end) for m in c.mentions])
        else:
            clusters.append([(namespace, m.begin, m.end) for m in c.mentions])
    return make_partition(clusters)


def corpus_partition(docs: Sequence[Document]) -> Partition:
    """Disjoint union of per-document partitions, mention keys scoped by doc id."""
    merged: list[Cluster] = []
    for d in docs:
        merged.extend(partition_from_document(d, namespace=d.id))
    return tuple(merged)


def _mention_map(partition: Partition) -> dict:
    return {m: c for c in partition for m in c}


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def muc(gold: Partition, pred: Partition) -> PRFReport:
    """Link-based score: recall numerator per gold cluster is
    |cluster| - (partitions of it induced by pred, counting each missing
    mention as its own part); precision swaps the roles."""

    def side(a: Partition, b_map: dict) -> tuple[int, int]:
        num = den = 0
        for cluster in a:
            parts = {b_map[m] for m in cluster if m in b_map}
            missing = sum(1 for m in cluster if m not in b_map)
            num += len(cluster) - len(parts) - missing
            den += len(cluster) - 1
        return num, den

    r_num, r_den = side(gold, _mention_map(pred))
    p_num, p_den = side(pred, _mention_map(gold))
    return PRFReport.from_pr(_safe_div(p_num, p_den), _safe_div(r_num, r_den))


def b_cubed(gold: Partition, pred: Partition) -> PRFReport:
    def side(a: Partition, b_map: dict) -> float:
        # fsum keeps the score independent of cluster iteration order
        terms = []
        count = 0
        for cluster in a:
            for m in cluster:
                count += 1
                other = b_map.get(m)
                if other is not None:
                    terms.append(len(cluster & other) / len(cluster))
        return _safe_div(math.fsum(terms), count)

    precision = side(pred, _mention_map(gold))
    recall = side(gold, _mention_map(pred))
    return PRFReport.from_pr(precision, recall)


def _phi4(a: Cluster, b: Cluster) -> float:
    return 2 * len(a & b) / (len(a) + len(b))


def ceaf_e(gold: Partition, pred: Partition) -> PRFReport:
    if not gold or not pred:
        return PRFReport.from_pr(0.0, 0.0)
    sim = np.zeros((len(gold), len(pred)))
    for i, g in enumerate(gold):
        for j, p in enumerate(pred):
            sim[i, j] = _phi4(g, p)
    rows, cols = linear_sum_assignment(sim, maximize=True)
    total = math.fsum(sim[r, c] for r, c in zip(rows, cols))
    return PRFReport.from_pr(total / len(pred), total / len(gold))


def avg_coref_f1(gold: Partition, pred: Partition) -> float:
    """Arithmetic mean of the MUC, B-cubed, and aligned-cluster F1 values."""
    scores = (muc(gold, pred), b_cubed(gold, pred), ceaf_e(gold, pred))
    return sum(s.f1 for s in scores) / 3.0


def coref_report(gold: Partition, pred: Partition) -> dict:
    m, b, c = muc(gold, pred), b_cubed(gold, pred), ceaf_e(gold, pred)
    return {
        "muc": {"precision": m.precision, "recall": m.recall, "f1": m.f1},
        "b3": {"precision": b.precision, "recall": b.recall, "f1": b.f1},
        "ceafe": {"precision": c.precision, "recall": c.recall, "f1": c.f1},
        "avg_f1": (m.f1 + b.f1 + c.f1) / 3.0,
    }
