"""Chance-corrected agreement between two annotators.

Core quantities over an aligned item list: observed agreement p_o (fraction
of items with identical labels), expected agreement p_e (probability of a
chance match given each annotator's label distribution), and kappa
(p_o - p_e) / (1 - p_e). Multi-label tasks are scored per label as binary
assigned/not-assigned decisions and combined by a support-weighted mean,
where a label's support is its assignment count across both annotators.

Corpus-level adapters align two annotation files item by item: mentions by
(document id, span), relations by (document id, head span, tail span) after
expanding entity-level relations to mention pairs, coreference by shared
mention pairs, and links by shared mentions. Items seen by only one annotator
enter as disagreements against an explicit absent marker, except in the
"conditioned" mode which restricts classification to jointly detected items.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Mapping, Sequence

from .corpus import Document, span_index

ABSENT = "<absent>"


@dataclass(frozen=True)
class AnnotationPair:
    """Aligned (annotator-1 label, annotator-2 label) decisions over N > 0 items."""

    items: tuple[tuple[Hashable, Hashable], ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("annotation pair needs at least one item")

    @classmethod
    def from_sequences(cls, a: Sequence[Hashable], b: Sequence[Hashable]
                       ) -> "AnnotationPair":
        if len(a) != len(b):
            raise ValueError(f"annotators labeled {len(a)} vs {len(b)} items")
        return cls(tuple(zip(a, b)))

    def __len__(self) -> int:
        return len(self.items)


def observed_agreement(p: AnnotationPair) -> float:
    """Fraction of items with identical labels."""
    return sum(1 for a, b in p.items if a == b) / len(p)


def expected_agreement(p: AnnotationPair) -> float:
    """Chance agreement: sum over labels of the product of both annotators'
    usage fractions."""
    n = len(p)
    counts_a = Counter(a for a, _ in p.items)
    counts_b = Counter(b for _, b in p.items)
    return sum(counts_a[l] * counts_b.get(l, 0) for l in counts_a) / (n * n)


def cohen_kappa(p: AnnotationPair) -> float:
    """(p_o - p_e) / (1 - p_e); when p_e = 1 the value is 1.0 for perfect
    agreement and undefined (raises) otherwise."""
    p_o = observed_agreement(p)
    p_e = expected_agreement(p)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise ValueError("kappa undefined: expected agreement is 1 "
                         "but observed agreement is not")
    return (p_o - p_e) / (1.0 - p_e)


def multilabel_kappa(pairs: Mapping[str, AnnotationPair]) -> float:
    """Support-weighted mean of per-label binary kappas.

    Each pair holds binary assigned/not-assigned decisions for one label; the
    weight is the label's positive count across both annotators. Labels with
    zero support carry no weight and are skipped.
    """
    if not pairs:
        raise ValueError("no labels to score")
    total_weight = 0
    weighted = 0.0
    for label in sorted(pairs):
        pair = pairs[label]
        support = sum(1 for a, _ in pair.items if a) \
            + sum(1 for _, b in pair.items if b)
        if support == 0:
            continue
        weighted += support * cohen_kappa(pair)
        total_weight += support
    if total_weight == 0:
        raise ValueError("no label was ever assigned by either annotator")
    return weighted / total_weight


# --------------------------------------------------------------------------
# Corpus-level alignment


def _pair_docs(docs_a: Sequence[Document], docs_b: Sequence[Document]
               ) -> list[tuple[Document, Document]]:
    by_id_a = {d.id: d for d in docs_a}
    by_id_b = {d.id: d for d in docs_b}
    if set(by_id_a) != set(by_id_b):
        only_a = sorted(set(by_id_a) - set(by_id_b))[:3]
        only_b = sorted(set(by_id_b) - set(by_id_a))[:3]
        raise ValueError(f"annotator corpora cover different documents "
                         f"(only a: {only_a}, only b: {only_b})")
    return [(by_id_a[i], by_id_b[i]) for i in sorted(by_id_a)]


def _mention_tags(d: Document) -> dict[tuple[int, int], frozenset[str]]:
    out = {}
    for c in d.clusters:
        for m in c.mentions:
            out[(m.begin, m.end)] = c.tags
    return out


def entity_agreement(docs_a: Sequence[Document], docs_b: Sequence[Document],
                     conditioned: bool = False) -> dict:
    """Mention detection kappa plus multi-label tag classification kappa.

    Detection items are all (doc, span) keys either annotator marked.
    Classification items are the same universe, with undetected spans holding
    no tags; conditioned=True restricts classification to spans both
    annotators detected.
    """
    detect = []
    per_label_items: dict[str, list[tuple[bool, bool]]] = {}
    n_class_items = 0
    for da, db in _pair_docs(docs_a, docs_b):
        tags_a, tags_b = _mention_tags(da), _mention_tags(db)
        universe = sorted(set(tags_a) | set(tags_b))
        for span in universe:
            in_a, in_b = span in tags_a, span in tags_b
            detect.append(("mention" if in_a else ABSENT,
                           "mention" if in_b else ABSENT))
            if conditioned and not (in_a and in_b):
                continue
            n_class_items += 1
            la = tags_a.get(span, frozenset())
            lb = tags_b.get(span, frozenset())
            for label in la | lb:
                per_label_items.setdefault(label, []).append(
                    (label in la, label in lb))
    detection_pair = AnnotationPair(tuple(detect))
    label_pairs = _pad_label_pairs(per_label_items, n_class_items)
    return {
        "detection": _kappa_summary(detection_pair),
        "classification": multilabel_kappa(label_pairs) if label_pairs else None,
        "per_label": {l: cohen_kappa(p) for l, p in sorted(label_pairs.items())},
    }


def _pad_label_pairs(per_label_items: dict[str, list[tuple[bool, bool]]],
                     n_items: int) -> dict[str, AnnotationPair]:
    """Extend each label's binary decisions with joint negatives so every
    label is scored over the full classification-item universe."""
    out = {}
    for label, items in per_label_items.items():
        padded = items + [(False, False)] * (n_items - len(items))
        out[label] = AnnotationPair(tuple(padded))
    return out


def _mention_pair_types(d: Document) -> dict[tuple, frozenset[str]]:
    by_id = d.cluster_by_id()
    out: dict[tuple, set[str]] = {}
    for r in d.relations:
        if r.head not in by_id or r.tail not in by_id:
            continue
        for hm in by_id[r.head].mentions:
            for tm in by_id[r.tail].mentions:
                key = ((hm.begin, hm.end), (tm.begin, tm.end))
                out.setdefault(key, set()).add(r.type)
    return {k: frozenset(v) for k, v in out.items()}


def relation_agreement(docs_a: Sequence[Document], docs_b: Sequence[Document],
                       conditioned: bool = False) -> dict:
    """Relation detection and type classification over mention pairs.

    Entity-level relations are expanded to all cross mention pairs so the two
    annotators' (possibly different) clusterings line up on shared spans.
    """
    detect = []
    per_label_items: dict[str, list[tuple[bool, bool]]] = {}
    n_class_items = 0
    for da, db in _pair_docs(docs_a, docs_b):
        rel_a, rel_b = _mention_pair_types(da), _mention_pair_types(db)
        for key in sorted(set(rel_a) | set(rel_b)):
            in_a, in_b = key in rel_a, key in rel_b
            detect.append(("related" if in_a else ABSENT,
                           "related" if in_b else ABSENT))
            if conditioned and not (in_a and in_b):
                continue
            n_class_items += 1
            la = rel_a.get(key, frozenset())
            lb = rel_b.get(key, frozenset())
            for label in la | lb:
                per_label_items.setdefault(label, []).append(
                    (label in la, label in lb))
    if not detect:
        raise ValueError("neither annotator produced any relation")
    detection_pair = AnnotationPair(tuple(detect))
    label_pairs = _pad_label_pairs(per_label_items, n_class_items)
    return {
        "detection": _kappa_summary(detection_pair),
        "classification": multilabel_kappa(label_pairs) if label_pairs else None,
        "per_label": {l: cohen_kappa(p) for l, p in sorted(label_pairs.items())},
    }


def coref_agreement(docs_a: Sequence[Document], docs_b: Sequence[Document]
                    ) -> dict:
    """Binary same-cluster agreement over pairs of jointly detected spans."""
    items = []
    for da, db in _pair_docs(docs_a, docs_b):
        idx_a = {(m.begin, m.end): cid for m, cid in span_index(da).items()}
        idx_b = {(m.begin, m.end): cid for m, cid in span_index(db).items()}
        shared = sorted(set(idx_a) & set(idx_b))
        for s1, s2 in combinations(shared, 2):
            items.append((idx_a[s1] == idx_a[s2], idx_b[s1] == idx_b[s2]))
    if not items:
        raise ValueError("no shared mention pairs to compare")
    return _kappa_summary(AnnotationPair(tuple(items)))


def linking_agreement(docs_a: Sequence[Document], docs_b: Sequence[Document]
                      ) -> dict:
    """Link-id agreement over jointly detected mentions; NIL and unannotated
    links are distinct labels."""

    def link_label(link) -> str:
        if isinstance(link, str):
            return link
        return "<nil>" if link is None else ABSENT

    items = []
    for da, db in _pair_docs(docs_a, docs_b):
        links_a = {(m.begin, m.end): link_label(c.link)
                   for c in da.clusters for m in c.mentions}
        links_b = {(m.begin, m.end): link_label(c.link)
                   for c in db.clusters for m in c.mentions}
        for span in sorted(set(links_a) & set(links_b)):
            items.append((links_a[span], links_b[span]))
    if not items:
        raise ValueError("no shared mentions to compare links on")
    return _kappa_summary(AnnotationPair(tuple(items)))


def _kappa_summary(pair: AnnotationPair) -> dict:
    return {
        "n_items": len(pair),
        "p_o": observed_agreement(pair),
        "p_e": expected_agreement(pair),
        "kappa": cohen_kappa(pair),
    }
