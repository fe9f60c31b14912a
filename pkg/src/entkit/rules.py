"""Forward-chaining consistency rules over entity-level annotations.

Rules are Horn clauses with one or two body atoms and a binary head. Binary
predicates range over relation types between clusters, unary predicates over
entity tags. The built-in rule set ships as a plain-text resource
(``resources/consistency_rules.txt``, one rule per line) so corrections stay
diffable:

    C.27: based_in2(X, Z) & in0(Z, Y) => based_in0(X, Y)
    C.29: agency_of(X, Y) & gpe0(Y) => based_in0(X, Y)

Terms starting with an uppercase letter are variables; two distinct constants
never unify. `closure` computes the least fixpoint of a fact base under a
rule set; `check_violations` reports satisfied rule bodies whose grounded
head is missing from a document's annotated relations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Document

_ATOM_RE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*\(\s*([^()]*?)\s*\)\s*$")


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...]

    def __post_init__(self):
        if len(self.args) not in (1, 2):
            raise ValueError(f"atom {self.predicate!r} must have 1 or 2 arguments")

    @property
    def is_binary(self) -> bool:
        return len(self.args) == 2

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(self.args)})"


def is_variable(term: str) -> bool:
    return bool(term) and term[0].isupper()


@dataclass(frozen=True)
class Rule:
    id: str
    body: tuple[Atom, ...]
    head: Atom

    def __post_init__(self):
        if not 1 <= len(self.body) <= 2:
            raise ValueError(f"rule {self.id}: body must have 1 or 2 atoms")
        if not self.head.is_binary:
            raise ValueError(f"rule {self.id}: head must be binary")
        body_vars = {t for a in self.body for t in a.args if is_variable(t)}
        head_vars = {t for t in self.head.args if is_variable(t)}
        if not head_vars <= body_vars:
            raise ValueError(f"rule {self.id}: head variables "
                             f"{sorted(head_vars - body_vars)} not bound by body")

    def __str__(self) -> str:
        return f"{self.id}: {' & '.join(map(str, self.body))} => {self.head}"


@dataclass
class FactBase:
    """Ground facts of one document: relations as binary facts
    (head id, predicate, tail id), tags as unary facts (predicate, id)."""

    binary: set[tuple[str, str, str]] = field(default_factory=set)
    unary: set[tuple[str, str]] = field(default_factory=set)

    def copy(self) -> "FactBase":
        return FactBase(set(self.binary), set(self.unary))

    def entities(self) -> set[str]:
        out: set[str] = set()
        for h, _, t in self.binary:
            out.add(h)
            out.add(t)
        out |= {e for _, e in self.unary}
        return out

    def __le__(self, other: "FactBase") -> bool:
        return self.binary <= other.binary and self.unary <= other.unary


def facts_from_document(d: Document) -> FactBase:
    """Relations become binary facts; every cluster tag becomes a unary fact.
    Tags of the form ``category::value`` also ground the bare value, so
    namespaced tag schemes still satisfy unary predicates."""
    facts = FactBase()
    for r in d.relations:
        facts.binary.add((r.head, r.type, r.tail))
    for c in d.clusters:
        for tag in c.tags:
            facts.unary.add((tag, c.id))
            if "::" in tag:
                facts.unary.add((tag.rsplit("::", 1)[1], c.id))
    return facts


# --------------------------------------------------------------------------
# Rule parsing


def parse_atom(text: str) -> Atom:
    m = _ATOM_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse atom {text!r}")
    args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
    return Atom(m.group(1), args)


def parse_rule(line: str, default_id: str | None = None) -> Rule:
    """Parse ``[id:] atom [& atom] => atom``."""
    rule_id = default_id
    text = line.strip()
    if "=>" not in text:
        raise ValueError(f"rule {text!r} has no '=>'")
    lhs, rhs = text.split("=>", 1)
    if ":" in lhs.split("(", 1)[0]:
        rule_id, lhs = lhs.split(":", 1)
        rule_id = rule_id.strip()
    body = tuple(parse_atom(a) for a in lhs.split("&"))
    head = parse_atom(rhs)
    return Rule(rule_id or "?", body, head)


def load_ruleset(path: str | Path) -> list[Rule]:
    return _parse_ruleset(Path(path).read_text(encoding="utf-8"))


def _parse_ruleset(text: str) -> list[Rule]:
    rules = []
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rules.append(parse_rule(line, default_id=f"line-{i}"))
    return rules


def builtin_ruleset() -> list[Rule]:
    """The shipped relation-consistency rule set (41 rules, ids C.1-C.41)."""
    text = (importlib_resources.files("entkit") / "resources"
            / "consistency_rules.txt").read_text(encoding="utf-8")
    return _parse_ruleset(text)


# --------------------------------------------------------------------------
# Matching and fixpoint


def _match_atom(atom: Atom, facts: FactBase,
                subst: dict[str, str]) -> Iterator[dict[str, str]]:
    """Yield extensions of `subst` that ground `atom` against `facts`."""

    def bind(terms: tuple[str, ...], values: tuple[str, ...],
             base: dict[str, str]) -> dict[str, str] | None:
        out = dict(base)
        for term, value in zip(terms, values):
            if is_variable(term):
                if out.get(term, value) != value:
                    return None
                out[term] = value
            elif term != value:
                return None
        return out

    if atom.is_binary:
        for h, p, t in facts.binary:
            if p != atom.predicate:
                continue
            ext = bind(atom.args, (h, t), subst)
            if ext is not None:
                yield ext
    else:
        for p, e in facts.unary:
            if p != atom.predicate:
                continue
            ext = bind(atom.args, (e,), subst)
            if ext is not None:
                yield ext


def _ground_head(head: Atom, subst: dict[str, str]) -> tuple[str, str, str]:
    h, t = (subst[a] if is_variable(a) else a for a in head.args)
    return (h, head.predicate, t)


def iter_groundings(facts: FactBase, rules: Iterable[Rule]
                    ) -> Iterator[tuple[Rule, dict[str, str], tuple[str, str, str]]]:
    """Every satisfied rule body, with its substitution and grounded head.
    Duplicate (rule, substitution) firings are suppressed."""
    for rule in rules:
        seen: set[tuple] = set()
        for s1 in _match_atom(rule.body[0], facts, {}):
            if len(rule.body) == 1:
                candidates = [s1]
            else:
                candidates = _match_atom(rule.body[1], facts, s1)
            for subst in candidates:
                key = tuple(sorted(subst.items()))
                if key in seen:
                    continue
                seen.add(key)
                yield rule, subst, _ground_head(rule.head, subst)


def closure(facts: FactBase, rules: Iterable[Rule] | None = None,
            max_rounds: int | None = None) -> FactBase:
    """Least fixpoint of `facts` under `rules`; the input is not mutated.

    Only binary facts are ever derived (heads are binary). Terminates because
    the derivable universe is bounded by #predicates x #entities^2; a hard cap
    on rounds guards against engine bugs and raises if exceeded.
    """
    rules = list(builtin_ruleset() if rules is None else rules)
    result = facts.copy()
    predicates = {r.head.predicate for r in rules}
    predicates |= {p for _, p, _ in result.binary}
    rule_constants = {t for r in rules for a in (*r.body, r.head)
                      for t in a.args if not is_variable(t)}
    n_entities = len(result.entities() | rule_constants)
    if max_rounds is None:
        max_rounds = len(predicates) * n_entities * n_entities + 2
    for _ in range(max_rounds):
        new_facts = set()
        for _rule, _subst, head in iter_groundings(result, rules):
            if head not in result.binary:
                new_facts.add(head)
        if not new_facts:
            return result
        result.binary |= new_facts
    raise RuntimeError(f"closure did not converge within {max_rounds} rounds")


@dataclass(frozen=True)
class Violation:
    rule_id: str
    head: tuple[str, str, str]
    substitution: tuple[tuple[str, str], ...]

    def to_json(self) -> dict:
        h, p, t = self.head
        return {"rule": self.rule_id,
                "missing": {"head": h, "type": p, "tail": t},
                "substitution": dict(self.substitution)}


def check_violations(d: Document, rules: Iterable[Rule] | None = None
                     ) -> list[Violation]:
    """Report each rule body satisfied by the document's annotations whose
    grounded head relation is not annotated."""
    rules = list(builtin_ruleset() if rules is None else rules)
    facts = facts_from_document(d)
    out = []
    for rule, subst, head in iter_groundings(facts, rules):
        if head not in facts.binary:
            out.append(Violation(rule.id, head, tuple(sorted(subst.items()))))
    return out


def count_firings(d: Document, rules: Iterable[Rule] | None = None) -> int:
    """Number of satisfied rule-body groundings in the document."""
    rules = list(builtin_ruleset() if rules is None else rules)
    return sum(1 for _ in iter_groundings(facts_from_document(d), rules))
