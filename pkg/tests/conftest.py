import random

import pytest

from entkit.corpus import Document, EntityCluster, Mention, RelationTriple


def make_doc(doc_id="d", n_tokens=30, clusters=(), relations=(), split="unsplit",
             sentences=None):
    """Compact document builder: clusters as (id, [(b, e), ...], tags[, link])."""
    built = []
    for spec in clusters:
        cid, spans, tags = spec[0], spec[1], spec[2]
        link = spec[3] if len(spec) > 3 else None
        built.append(EntityCluster(cid, tuple(Mention(b, e) for b, e in spans),
                                   frozenset(tags), link))
    rels = tuple(RelationTriple(h, t, tl) for h, t, tl in relations)
    if sentences is None:
        sentences = ((0, n_tokens),) if n_tokens else ()
    return Document(doc_id, tuple(f"tok{i}" for i in range(n_tokens)),
                    tuple(sentences), tuple(built), rels, split)


SPAN_POOL = [(b, b + w) for b in range(24) for w in (1, 2) if b + w <= 24]


def random_labeled_doc(rng: random.Random, doc_id: str, max_clusters=5,
                       max_labels=4, max_mentions=6, with_relations=False):
    """Random well-formed document drawing spans from a shared pool so two
    independently drawn documents overlap."""
    labels = ["L1", "L2", "L3", "L4"][:max_labels]
    spans = rng.sample(SPAN_POOL, rng.randint(1, min(len(SPAN_POOL),
                                                     max_clusters * max_mentions)))
    rng.shuffle(spans)
    clusters = []
    i = 0
    cursor = 0
    while cursor < len(spans) and len(clusters) < max_clusters:
        take = rng.randint(1, min(max_mentions, len(spans) - cursor))
        chunk = spans[cursor:cursor + take]
        cursor += take
        tags = rng.sample(labels, rng.randint(0, len(labels)))
        clusters.append((f"{doc_id}-c{i}", chunk, tags))
        i += 1
    relations = []
    if with_relations and len(clusters) >= 2:
        ids = [c[0] for c in clusters]
        for _ in range(rng.randint(0, 4)):
            head, tail = rng.sample(ids, 2)
            relations.append((head, rng.choice(["R1", "R2", "R3"]), tail))
    return make_doc(doc_id, n_tokens=30, clusters=clusters,
                    relations=sorted(set(relations)))


@pytest.fixture
def rng():
    return random.Random(2024)
