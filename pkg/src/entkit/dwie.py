"""Best-effort converter from the public DWIE annotation release to the
canonical corpus schema.

The release stores one JSON file per article with character-offset mentions,
numeric concept ids, concept-level tags/links, and concept-pair relations.
The canonical schema is token-based, so this converter tokenizes the article
content itself (regex word/punctuation tokenizer, sentence breaks at newlines
and sentence-final punctuation). Token and sentence counts therefore depend
on this tokenizer and may differ from counts produced by other tokenizations
of the same text.

Field mapping:
  concepts[i]          -> cluster "c<i>"; tags kept verbatim (including any
                          "category::value" namespacing); "link" null -> NIL,
                          missing -> unannotated.
  mentions[*].concept  -> cluster membership; char span snapped to the
                          overlapping token range.
  relations[*] {s,p,o} -> {head: "c<s>", type: p, tail: "c<o>"}.
  top-level "tags"     -> split ("train" / "test" / "unsplit").

Concepts that never appear as a mention cannot be represented (clusters must
be non-empty) and are dropped together with their relations; the per-document
drop counts are reported.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Document, EntityCluster, Mention, RelationTriple, UNANNOTATED

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_SENT_FINAL = {".", "!", "?"}


@dataclass
class ConversionReport:
    documents: int = 0
    dropped_concepts: int = 0
    dropped_relations: int = 0
    unaligned_mentions: int = 0
    notes: list[str] = field(default_factory=list)


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def sentence_intervals(text: str, tokens: list[tuple[str, int, int]]
                       ) -> list[tuple[int, int]]:
    """Break after sentence-final punctuation or a newline gap; always a
    contiguous cover of the token range."""
    if not tokens:
        return []
    boundaries = []
    for i, (tok, _b, e) in enumerate(tokens):
        last = i == len(tokens) - 1
        gap = "" if last else text[e:tokens[i + 1][1]]
        if last or tok in _SENT_FINAL or "\n" in gap:
            boundaries.append(i + 1)
    intervals = []
    begin = 0
    for end in boundaries:
        if end > begin:
            intervals.append((begin, end))
            begin = end
    if begin < len(tokens):
        intervals.append((begin, len(tokens)))
    return intervals


def char_span_to_token_span(tokens: list[tuple[str, int, int]],
                            begin: int, end: int) -> Mention | None:
    first = last = None
    for i, (_t, tb, te) in enumerate(tokens):
        if te > begin and tb < end:
            if first is None:
                first = i
            last = i
    if first is None:
        return None
    return Mention(first, last + 1)


def convert_annotation(obj: dict, report: ConversionReport | None = None
                       ) -> Document:
    """Convert one decoded release file to a canonical Document."""
    report = report if report is not None else ConversionReport()
    doc_id = str(obj.get("id", "unknown"))
    content = obj.get("content") or ""
    if not content:
        report.notes.append(f"{doc_id}: no article content; run the release's "
                            "content-fetch step first")
    tokens = tokenize_with_offsets(content)
    sentences = sentence_intervals(content, tokens)

    mentions_by_concept: dict[int, list[Mention]] = {}
    for m in obj.get("mentions", []):
        span = char_span_to_token_span(tokens, int(m["begin"]), int(m["end"]))
        if span is None:
            report.unaligned_mentions += 1
            continue
        mentions_by_concept.setdefault(int(m["concept"]), []).append(span)

    clusters = []
    kept: set[int] = set()
    for c in obj.get("concepts", []):
        idx = int(c["concept"])
        spans = mentions_by_concept.get(idx)
        if not spans:
            report.dropped_concepts += 1
            continue
        kept.add(idx)
        tags = c.get("tags") or []
        if isinstance(tags, str):
            tags = [t for t in tags.split(";") if t]
        link = c["link"] if "link" in c else UNANNOTATED
        clusters.append(EntityCluster(f"c{idx}", tuple(spans),
                                      frozenset(tags), link))

    relations = []
    for r in obj.get("relations", []):
        s, o = int(r["s"]), int(r["o"])
        if s in kept and o in kept:
            relations.append(RelationTriple(f"c{s}", str(r["p"]), f"c{o}"))
        else:
            report.dropped_relations += 1

    doc_tags = obj.get("tags") or []
    split = "train" if "train" in doc_tags else \
        "test" if "test" in doc_tags else "unsplit"
    report.documents += 1
    return Document(doc_id, tuple(t for t, _b, _e in tokens),
                    tuple(sentences), tuple(clusters), tuple(relations), split)


def convert_release(src_dir: str | Path) -> tuple[list[Document], ConversionReport]:
    """Convert every *.json file under `src_dir`, in filename order."""
    report = ConversionReport()
    docs = []
    for path in sorted(Path(src_dir).glob("*.json")):
        obj = json.loads(path.read_text(encoding="utf-8"))
        docs.append(convert_annotation(obj, report))
    return docs, report
