"""Descriptive statistics over entity-centric corpora.

Covers relation distance profiles (how far apart the mentions of related
entities sit, in tokens and in sentences), entity-type histograms with
hierarchy rollup, relation-type histograms, multi-label relation histograms,
a corpus summary, and a train-prior entity-linking baseline.

Distance convention: the token gap between two spans counts the tokens
strictly between them (0 for adjacent or overlapping spans); the sentence
distance is the absolute difference of the sentence indices containing the
spans' begin tokens. Per relation, the minimum is taken over the closest
cross mention pair and the maximum over the farthest.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document, Mention


# --------------------------------------------------------------------------
# Relation distance profiles


@dataclass(frozen=True)
class DistanceRecord:
    min_token_gap: int
    max_token_gap: int
    min_sentence_dist: int
    max_sentence_dist: int


@dataclass
class DistanceProfile:
    records: list[DistanceRecord] = field(default_factory=list)

    def _cdf(self, values: list[int], threshold: int) -> float:
        if not self.records:
            return 1.0
        return sum(1 for v in values if v <= threshold) / len(self.records)

    def cdf_min_tokens(self, d: int) -> float:
        return self._cdf([r.min_token_gap for r in self.records], d)

    def cdf_max_tokens(self, d: int) -> float:
        return self._cdf([r.max_token_gap for r in self.records], d)

    def cdf_min_sentences(self, d: int) -> float:
        return self._cdf([r.min_sentence_dist for r in self.records], d)

    def cdf_max_sentences(self, d: int) -> float:
        return self._cdf([r.max_sentence_dist for r in self.records], d)

    def coverage_table(self) -> list[tuple[int, float, float, float, float]]:
        """Rows (threshold, cdf_min_tokens, cdf_max_tokens, cdf_min_sent,
        cdf_max_sent) for thresholds 0..max observed value."""
        if not self.records:
            return []
        top = max(max(r.max_token_gap, r.max_sentence_dist) for r in self.records)
        return [(d, self.cdf_min_tokens(d), self.cdf_max_tokens(d),
                 self.cdf_min_sentences(d), self.cdf_max_sentences(d))
                for d in range(top + 1)]


def token_gap(a: Mention, b: Mention) -> int:
    """Tokens strictly between two spans; 0 when they touch or overlap."""
    if a.begin > b.begin or (a.begin == b.begin and a.end > b.end):
        a, b = b, a
    return max(0, b.begin - a.end)


def _sentence_of(sentence_begins: list[int], token: int) -> int:
    return bisect_right(sentence_begins, token) - 1


def relation_distance_profile(docs: Iterable[Document]) -> DistanceProfile:
    """One record per distinct relation triple, min/max over cross mention pairs."""
    profile = DistanceProfile()
    for d in docs:
        begins = [b for b, _ in d.sentences]
        by_id = d.cluster_by_id()
        for head_id, rel_type, tail_id in sorted(
                {(r.head, r.type, r.tail) for r in d.relations}):
            head, tail = by_id[head_id], by_id[tail_id]
            if set(head.mentions) & set(tail.mentions):
                raise ValueError(
                    f"{d.id}: relation {rel_type!r} connects clusters "
                    f"{head_id!r} and {tail_id!r} that share a mention span")
            gaps, dists = [], []
            for hm in head.mentions:
                for tm in tail.mentions:
                    gaps.append(token_gap(hm, tm))
                    dists.append(abs(_sentence_of(begins, hm.begin)
                                     - _sentence_of(begins, tm.begin)))
            profile.records.append(DistanceRecord(
                min(gaps), max(gaps), min(dists), max(dists)))
    return profile


# --------------------------------------------------------------------------
# Entity type histogram with hierarchy rollup


def load_type_hierarchy(path: str | Path | None = None) -> dict[str, str | None]:
    """Parse the indented hierarchy resource into a tag -> parent map
    (top-level tags map to None). Two spaces per level."""
    if path is None:
        text = (importlib_resources.files("entkit") / "resources"
                / "type_hierarchy.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    parents: dict[str, str | None] = {}
    stack: list[tuple[int, str]] = []
    for line in text.splitlines():
        if not line.strip() or line.strip().startswith("#"):
            continue
        depth = (len(line) - len(line.lstrip(" "))) // 2
        tag = line.strip()
        while stack and stack[-1][0] >= depth:
            stack.pop()
        parents[tag] = stack[-1][1] if stack else None
        stack.append((depth, tag))
    return parents


def ancestors(tag: str, hierarchy: dict[str, str | None]) -> list[str]:
    """Tag itself plus every ancestor up to the hierarchy root."""
    chain = [tag]
    seen = {tag}
    while True:
        parent = hierarchy.get(chain[-1])
        if parent is None or parent in seen:
            return chain
        chain.append(parent)
        seen.add(parent)


@dataclass
class TypeHistogram:
    direct: dict[str, tuple[int, int]]
    rollup: dict[str, tuple[int, int]]
    total_clusters: int
    total_mentions: int

    def percentages(self, rolled: bool = True) -> dict[str, tuple[float, float]]:
        source = self.rollup if rolled else self.direct
        out = {}
        for tag, (clusters, mentions) in source.items():
            out[tag] = (
                clusters / self.total_clusters if self.total_clusters else 0.0,
                mentions / self.total_mentions if self.total_mentions else 0.0,
            )
        return out


def entity_type_histogram(docs: Iterable[Document],
                          hierarchy: dict[str, str | None] | None = None
                          ) -> TypeHistogram:
    """Cluster and mention counts per tag, plus counts rolled up to each
    ancestor (a cluster counts once per ancestor node that covers any of its
    tags)."""
    if hierarchy is None:
        hierarchy = load_type_hierarchy()
    direct: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    rollup: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    total_clusters = total_mentions = 0
    for d in docs:
        for c in d.clusters:
            total_clusters += 1
            total_mentions += len(c.mentions)
            for tag in c.tags:
                direct[tag][0] += 1
                direct[tag][1] += len(c.mentions)
            covered: set[str] = set()
            for tag in c.tags:
                covered.update(ancestors(tag, hierarchy))
            for node in covered:
                rollup[node][0] += 1
                rollup[node][1] += len(c.mentions)
    return TypeHistogram(
        direct={t: (c, m) for t, (c, m) in direct.items()},
        rollup={t: (c, m) for t, (c, m) in rollup.items()},
        total_clusters=total_clusters,
        total_mentions=total_mentions,
    )


# --------------------------------------------------------------------------
# Relation histograms


@dataclass
class RelationTypeHistogram:
    per_type: dict[str, tuple[int, int]]
    total_entity_pairs: int
    total_mention_pairs: int


def relation_type_histogram(docs: Iterable[Document]) -> RelationTypeHistogram:
    """Per type: distinct related cluster pairs and their summed mention-pair
    cross products. Totals count each distinct (head, tail) pair once,
    regardless of how many types connect it."""
    per_type: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    total_pairs = 0
    total_mention_pairs = 0
    for d in docs:
        sizes = {c.id: len(c.mentions) for c in d.clusters}
        triples = {(r.head, r.type, r.tail) for r in d.relations}
        for head, rel_type, tail in triples:
            product = sizes[head] * sizes[tail]
            per_type[rel_type][0] += 1
            per_type[rel_type][1] += product
        for head, tail in {(h, t) for h, _, t in triples}:
            total_pairs += 1
            total_mention_pairs += sizes[head] * sizes[tail]
    return RelationTypeHistogram(
        per_type={t: (e, m) for t, (e, m) in per_type.items()},
        total_entity_pairs=total_pairs,
        total_mention_pairs=total_mention_pairs,
    )


def multilabel_relation_histogram(docs: Iterable[Document]
                                  ) -> dict[int, tuple[int, int]]:
    """Bucket related (head, tail) pairs by how many relation types connect
    them: bucket -> (entity pairs, mention pairs). Buckets 1..3 are exact,
    bucket 4 holds four or more."""
    buckets: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for d in docs:
        sizes = {c.id: len(c.mentions) for c in d.clusters}
        types_per_pair: dict[tuple[str, str], set[str]] = defaultdict(set)
        for r in d.relations:
            types_per_pair[(r.head, r.tail)].add(r.type)
        for (head, tail), types in types_per_pair.items():
            bucket = min(len(types), 4)
            buckets[bucket][0] += 1
            buckets[bucket][1] += sizes[head] * sizes[tail]
    return {b: (e, m) for b, (e, m) in sorted(buckets.items())}


# --------------------------------------------------------------------------
# Corpus summary


@dataclass
class CorpusSummary:
    tokens: int = 0
    mentions: int = 0
    clusters: int = 0
    entity_types: int = 0
    relation_triples: int = 0
    relation_types: int = 0
    linked_mentions: int = 0
    linked_clusters: int = 0
    singleton_fraction: float = 0.0
    mean_labels_per_entity: float = 0.0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def corpus_summary(docs: Iterable[Document]) -> CorpusSummary:
    s = CorpusSummary()
    tags: set[str] = set()
    rel_types: set[str] = set()
    singletons = 0
    total_labels = 0
    for d in docs:
        s.tokens += len(d.tokens)
        s.relation_triples += len({(r.head, r.type, r.tail) for r in d.relations})
        rel_types |= {r.type for r in d.relations}
        for c in d.clusters:
            s.clusters += 1
            s.mentions += len(c.mentions)
            tags |= c.tags
            total_labels += len(c.tags)
            if c.is_singleton:
                singletons += 1
            if c.is_linked:
                s.linked_clusters += 1
                s.linked_mentions += len(c.mentions)
    s.entity_types = len(tags)
    s.relation_types = len(rel_types)
    if s.clusters:
        s.singleton_fraction = singletons / s.clusters
        s.mean_labels_per_entity = total_labels / s.clusters
    return s


# --------------------------------------------------------------------------
# Train-prior linking baseline


def prior_link_baseline(train_docs: Sequence[Document],
                        test_docs: Sequence[Document]) -> float:
    """Predict each test mention's link as the most frequent gold link its
    exact token surface received in training (ties broken by lexicographically
    smallest link id, unseen surfaces predict NIL); accuracy is measured over
    test mentions whose gold cluster is linked."""
    votes: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    for d in train_docs:
        for c in d.clusters:
            if not c.is_linked:
                continue
            for m in c.mentions:
                votes[tuple(d.tokens[m.begin:m.end])][c.link] += 1

    best: dict[tuple[str, ...], str] = {}
    for surface, counter in votes.items():
        top = max(counter.values())
        best[surface] = min(l for l, n in counter.items() if n == top)

    correct = total = 0
    for d in test_docs:
        for c in d.clusters:
            if not c.is_linked:
                continue
            for m in c.mentions:
                total += 1
                predicted = best.get(tuple(d.tokens[m.begin:m.end]))
                if predicted == c.link:
                    correct += 1
    if total == 0:
        raise ValueError("test corpus has no mentions with a gold link")
    return correct / total
