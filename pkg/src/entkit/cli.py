"""Command-line entry point.

Subcommands: validate, stats, score, decode, rules, kappa, kernels, convert.
Reports go to stdout as JSON (schema_version 1), diagnostics to stderr.
Exit codes: 0 ok, 1 findings under --strict, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import agreement, coref, dwie, metrics, rules, selftest, stats
from .corpus import (CorpusError, Document, load_corpus, serialize_corpus,
                     validate_document)
from .decoder import (decode_entity_centric, decode_input_from_json,
                      decode_output_to_json)

SCHEMA_VERSION = 1


def _emit(payload: dict, out: str | None) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load(path: str) -> list[Document]:
    fmt = "per-file" if Path(path).is_dir() else "jsonl"
    return load_corpus(path, fmt)


def _prf_json(report: metrics.PRFReport) -> dict:
    return {"precision": report.precision, "recall": report.recall,
            "f1": report.f1}


# --------------------------------------------------------------------------
# Subcommands


def _cmd_validate(args) -> int:
    docs = _load(args.corpus)
    errors, warnings = [], []
    for d in docs:
        report = validate_document(d)
        errors.extend({"doc": f.doc_id, "code": f.code, "message": f.message}
                      for f in report.errors)
        warnings.extend({"doc": f.doc_id, "code": f.code, "message": f.message}
                        for f in report.warnings)
    _emit({"documents": len(docs), "errors": errors, "warnings": warnings},
          args.out)
    return 1 if errors and args.strict else 0


def _cmd_stats(args) -> int:
    docs = _load(args.corpus)
    findings = [f for d in docs for f in validate_document(d).errors]
    if findings:
        raise CorpusError(
            f"corpus fails validation ({len(findings)} error(s)); "
            "run `entkit validate` for the full report")
    summary = stats.corpus_summary(docs)
    type_hist = stats.entity_type_histogram(docs)
    rel_hist = stats.relation_type_histogram(docs)
    multilabel = stats.multilabel_relation_histogram(docs)
    payload = {
        "summary": summary.to_json(),
        "entity_types": {
            "direct": {t: {"clusters": c, "mentions": m}
                       for t, (c, m) in sorted(type_hist.direct.items())},
            "rollup": {t: {"clusters": c, "mentions": m}
                       for t, (c, m) in sorted(type_hist.rollup.items())},
        },
        "relation_types": {
            "per_type": {t: {"entity_pairs": e, "mention_pairs": m}
                         for t, (e, m) in sorted(rel_hist.per_type.items())},
            "total_entity_pairs": rel_hist.total_entity_pairs,
            "total_mention_pairs": rel_hist.total_mention_pairs,
        },
        "relation_labels_per_pair": {
            str(b): {"entity_pairs": e, "mention_pairs": m}
            for b, (e, m) in multilabel.items()},
    }
    if args.plot_data:
        profile = stats.relation_distance_profile(docs)
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            fh.write("threshold\tcdf_min_tokens\tcdf_max_tokens"
                     "\tcdf_min_sent\tcdf_max_sent\n")
            for row in profile.coverage_table():
                fh.write("\t".join(str(x) for x in row) + "\n")
    _emit(payload, args.out)
    return 0


def _paired_docs(gold_path: str, pred_path: str
                 ) -> list[tuple[Document, Document]]:
    gold = {d.id: d for d in _load(gold_path)}
    pred = {d.id: d for d in _load(pred_path)}
    if set(gold) != set(pred):
        raise CorpusError("gold and predicted corpora cover different "
                          "document ids")
    return [(gold[i], pred[i]) for i in sorted(gold)]


def _score_task(pairs, task: str, levels: list[str], per_label: bool) -> dict:
    views = [metrics.build_eval_view(g, p, task) for g, p in pairs]
    out: dict = {}
    for level in levels:
        out[level] = _prf_json(metrics.score_level(views, level))
        if per_label:
            out.setdefault("per_label", {})[level] = {
                label: _prf_json(r)
                for label, r in metrics.per_label_prf(views, level).items()}
    return out


def _cmd_score(args) -> int:
    pairs = _paired_docs(args.gold, args.pred)
    levels = list(metrics.LEVELS) if args.level == "all" else [args.level]
    payload: dict = {}
    tasks = ["ner", "re", "coref"] if args.task == "all" else [args.task]
    for task in tasks:
        if task == "coref":
            gold_part = coref.corpus_partition([g for g, _ in pairs])
            pred_part = coref.corpus_partition([p for _, p in pairs])
            payload["coref"] = coref.coref_report(gold_part, pred_part)
        else:
            payload[task] = _score_task(pairs, task, levels, args.per_label)
    if len(tasks) == 1:
        payload = payload[tasks[0]]
    _emit(payload, args.out)
    return 0


def _cmd_decode(args) -> int:
    with open(args.pred, encoding="utf-8") as fh:
        obj = json.load(fh)
    result = decode_entity_centric(decode_input_from_json(obj))
    _emit(decode_output_to_json(result), args.out)
    return 0


def _cmd_rules_check(args) -> int:
    docs = _load(args.corpus)
    ruleset = rules.load_ruleset(args.rules) if args.rules \
        else rules.builtin_ruleset()
    violations = []
    firings = 0
    for d in docs:
        firings += rules.count_firings(d, ruleset)
        for v in rules.check_violations(d, ruleset):
            violations.append({"doc": d.id, **v.to_json()})
    payload = {
        "rules": len(ruleset),
        "firings": firings,
        "violations": violations,
        "violation_rate": len(violations) / firings if firings else 0.0,
    }
    if args.closure:
        closed = []
        for d in docs:
            facts = rules.facts_from_document(d)
            derived = rules.closure(facts, ruleset).binary - facts.binary
            closed.append({
                "doc": d.id,
                "derived": [{"head": h, "type": p, "tail": t}
                            for h, p, t in sorted(derived)],
            })
        payload["closure"] = closed
    _emit(payload, args.out)
    return 1 if violations and args.strict else 0


def _cmd_kappa(args) -> int:
    docs_a, docs_b = _load(args.a), _load(args.b)
    if args.task == "entity":
        result = agreement.entity_agreement(docs_a, docs_b,
                                            conditioned=args.conditioned)
    elif args.task == "relation":
        result = agreement.relation_agreement(docs_a, docs_b,
                                              conditioned=args.conditioned)
    elif args.task == "coref":
        result = agreement.coref_agreement(docs_a, docs_b)
    else:
        result = agreement.linking_agreement(docs_a, docs_b)
    _emit({"task": args.task, "result": result}, args.out)
    return 0


def _cmd_kernels_selftest(args) -> int:
    deviations = selftest.run_selftest(trials=args.trials, seed=args.seed)
    worst = max(deviations.values())
    for name in sorted(deviations):
        print(f"{name}: max deviation {deviations[name]:.3e}", file=sys.stderr)
    _emit({"max_abs_deviation": deviations, "worst": worst,
           "ok": worst < 1e-9}, args.out)
    return 0 if worst < 1e-9 else 1


def _cmd_convert(args) -> int:
    docs, report = dwie.convert_release(args.src)
    serialize_corpus(docs, args.out_corpus)
    _emit({"documents": report.documents,
           "dropped_concepts": report.dropped_concepts,
           "dropped_relations": report.dropped_relations,
           "unaligned_mentions": report.unaligned_mentions,
           "notes": report.notes}, args.out)
    return 0


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entkit",
        description="Entity-centric document-level IE toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check corpus invariants")
    p.add_argument("corpus")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when any error is found")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("stats", help="corpus statistics report")
    p.add_argument("corpus")
    p.add_argument("--out")
    p.add_argument("--plot-data", help="write distance-coverage TSV here")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("--task", choices=["ner", "re", "coref", "all"],
                   required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--level", choices=["mention", "hard", "soft", "all"],
                   default="all")
    p.add_argument("--per-label", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("decode", help="lift span predictions to entities")
    p.add_argument("--pred", required=True,
                   help="JSON file with p_cl / p_men / p_rel")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_decode)

    p = sub.add_parser("rules", help="relation-consistency rules")
    rules_sub = p.add_subparsers(dest="rules_command", required=True)
    p = rules_sub.add_parser("check", help="report rule violations")
    p.add_argument("corpus")
    p.add_argument("--rules", help="custom rule file (default: built-in set)")
    p.add_argument("--closure", action="store_true",
                   help="also list the derivable missing relations per document")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when any violation is found")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_rules_check)

    p = sub.add_parser("kappa", help="inter-annotator agreement")
    p.add_argument("--a", required=True, help="first annotator's corpus")
    p.add_argument("--b", required=True, help="second annotator's corpus")
    p.add_argument("--task", choices=["entity", "coref", "linking", "relation"],
                   required=True)
    p.add_argument("--conditioned", action="store_true",
                   help="restrict classification to jointly detected items")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_kappa)

    p = sub.add_parser("kernels", help="numeric kernel utilities")
    kernels_sub = p.add_subparsers(dest="kernels_command", required=True)
    p = kernels_sub.add_parser("selftest",
                               help="compare kernels with loop references")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=20240)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_kernels_selftest)

    p = sub.add_parser("convert",
                       help="convert a DWIE annotation release directory")
    p.add_argument("src", help="directory with the release's *.json files")
    p.add_argument("--out-corpus", required=True,
                   help="canonical JSONL output path")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_convert)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
