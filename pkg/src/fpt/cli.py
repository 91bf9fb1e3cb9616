"""Batch command-line interface.

Verbs: build, stats, predict, counterfactual, evaluate, export-tree, serve.
Machine-readable JSON goes to stdout (stable key order, so identical inputs
give byte-identical output); diagnostics go to stderr. Exit codes: 0 success,
1 usage error, 2 data or validation error, 3 undefined conditional.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .decision import Substitution, classify, counterfactual
from .errors import FptError, QueryError, UndefinedConditionalError
from .evaluation import (
    bootstrap_compare,
    bootstrap_evaluate,
    comparison_to_json,
    report_to_json,
    report_to_table,
)
from .inference import PatientQuery, conditional_probability, predict_detailed, query_from_record
from .ingest import ModelSpec, complete_rows, load_dataset, load_spec
from .tree import ProbabilityTree, Statement, build_tree, tree_stats, tree_to_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_UNDEFINED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of calling sys.exit(2)."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fpt", description="Probability-tree inference with fuzzy branching")
    sub = parser.add_subparsers(dest="verb", metavar="verb")

    def common(p, data=True):
        p.add_argument("--spec", required=True, help="model spec file (JSON)")
        if data:
            p.add_argument("--data", required=True, help="training data (CSV)")
            p.add_argument("--alpha", type=float, default=0.0,
                           help="additive smoothing for transition frequencies")

    p = sub.add_parser("build", help="ingest data, build the tree, report accounting")
    common(p)
    p.add_argument("--out", help="write the serialised tree to this file")

    p = sub.add_parser("stats", help="realisation count and rows per realisation")
    common(p)
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("predict", help="class probability for one patient")
    common(p)
    p.add_argument("--query", help="query file, inline k=v pairs, or 'demo-patient'")
    p.add_argument("--given", help="condition statements k=v[,k=v...] (conditional mode)")
    p.add_argument("--class", dest="target_class", type=int, default=1, choices=(0, 1))
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--crisp", action="store_true", help="ignore fuzzy bindings (hard cuts only)")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("counterfactual", help="what-if comparison after substitutions")
    common(p)
    p.add_argument("--query", required=True)
    p.add_argument("--sub", action="append", default=[], metavar="VAR=VALUE",
                   help="substitution; empty value drops the variable (repeatable)")
    p.add_argument("--class", dest="target_class", type=int, default=1, choices=(0, 1))
    p.add_argument("--threshold", type=float, default=None)

    p = sub.add_parser("evaluate", help="bootstrap metrics with 95%% confidence intervals")
    common(p)
    p.add_argument("--resamples", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--paired", action="store_true",
                   help="also evaluate the hard-cut model on the same resamples")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("export-tree", help="print the serialised tree")
    common(p)
    p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    common(p)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def _emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _emit_table(pairs: Sequence[tuple[str, object]]) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"{key:<{width}}  {value}")


def fingerprint_files(*paths: str | Path) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(Path(p).read_bytes())
    return digest.hexdigest()


def _load_model(args) -> tuple[ModelSpec, list[dict], ProbabilityTree, dict]:
    spec = load_spec(args.spec)
    rows, report = load_dataset(args.data, spec)
    usable = complete_rows(rows, spec)
    if len(usable) < len(rows):
        print(
            f"note: {len(rows) - len(usable)} retained rows have missing values "
            "and were not used for induction",
            file=sys.stderr,
        )
    tree = build_tree(usable, spec.variables, spec.bindings, alpha=getattr(args, "alpha", 0.0))
    accounting = {
        "rows_read": report.rows_read,
        "retained": report.retained,
        "flagged": report.flagged,
        "exclusions": [[name, count] for name, count in report.exclusions],
        "induction_rows": len(usable),
        "fingerprint": fingerprint_files(args.spec, args.data),
    }
    return spec, rows, tree, accounting


def parse_pairs(text: str) -> dict[str, str]:
    """Parse 'k=v[,k=v...]' (';' also accepted); empty value means removal."""
    out: dict[str, str] = {}
    for chunk in text.replace(";", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise UsageError(f"expected key=value, got {chunk!r}")
        key, _, value = chunk.partition("=")
        out[key.strip()] = value.strip()
    return out


def query_from_parts(
    spec: ModelSpec,
    statements: Mapping[str, str],
    raw_values: Mapping[str, float],
    target_class: int,
) -> PatientQuery:
    """Canonical query construction shared by the CLI and the service:
    categorical variables arrive as statements, fuzzy-bound ones as raw
    measurements only (their statements are derived through the hard cuts)."""
    names = {v.name for v in spec.variables}
    record: dict = {}
    for name, value in statements.items():
        if name not in names:
            raise QueryError(f"unknown variable {name!r} in query")
        if name in spec.bindings:
            raise QueryError(
                f"{name!r} is fuzzy-bound; supply its raw measurement via raw_values"
            )
        record[name] = str(value)
    for name, value in raw_values.items():
        if name not in spec.bindings:
            raise QueryError(f"{name!r} has no fuzzy binding; supply it as a statement")
        record[name] = float(value)
    return query_from_record(spec.variables, spec.bindings, record, target_class=target_class)


def _load_query(args, spec: ModelSpec) -> PatientQuery:
    source = args.query
    if not source:
        raise UsageError("--query is required (file, inline k=v pairs, or 'demo-patient')")
    if source == "demo-patient":
        doc = json.loads(
            resources.files("fpt").joinpath("data/demo_patient.json").read_text("utf-8")
        )
    elif "=" in source:
        record = parse_pairs(source)
        statements = {k: v for k, v in record.items() if k not in spec.bindings}
        raws = {k: float(v) for k, v in record.items() if k in spec.bindings}
        return query_from_parts(spec, statements, raws, args.target_class)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    statements = doc.get("statements", {})
    raws = doc.get("raw_values", {})
    return query_from_parts(spec, statements, raws, args.target_class)


def _statements_from_pairs(pairs: Mapping[str, str]) -> list[Statement]:
    return [Statement(k, v) for k, v in pairs.items()]


def _branches_json(branches) -> list[dict]:
    return [
        {
            "parent": b.parent_id,
            "variable": b.variable,
            "value": b.value,
            "weight": b.weight,
            "mode": b.mode,
        }
        for b in branches
    ]


def _cmd_build(args) -> int:
    _, _, tree, accounting = _load_model(args)
    stats = tree_stats(tree)
    if args.out:
        Path(args.out).write_text(tree_to_json(tree) + "\n", encoding="utf-8")
        accounting["tree_file"] = args.out
    accounting["stats"] = asdict(stats)
    _emit(accounting)
    return EXIT_OK


def _cmd_stats(args) -> int:
    _, _, tree, accounting = _load_model(args)
    stats = tree_stats(tree)
    doc = {**asdict(stats), "fingerprint": accounting["fingerprint"]}
    if args.format == "table":
        _emit_table(sorted(doc.items()))
    else:
        _emit(doc)
    return EXIT_OK


def _cmd_predict(args) -> int:
    spec, _, tree, accounting = _load_model(args)
    threshold = args.threshold if args.threshold is not None else spec.threshold

    if args.given:
        if args.query:
            raise UsageError("--given and --query are mutually exclusive")
        conditions = _statements_from_pairs(parse_pairs(args.given))
        value = conditional_probability(tree, conditions, args.target_class)
        doc = {
            "conditional_probability": value,
            "target_class": args.target_class,
            "conditions": [[s.variable, s.value] for s in conditions],
            "fingerprint": accounting["fingerprint"],
        }
        _emit(doc)
        return EXIT_OK

    query = _load_query(args, spec)
    fuzzy = not args.crisp
    detail = predict_detailed(tree, query, fuzzy=fuzzy)
    p_target = detail.probability
    p_other = predict_detailed(tree, query.complement(), fuzzy=fuzzy).probability
    p1 = p_target if args.target_class == 1 else p_other
    p0 = p_other if args.target_class == 1 else p_target
    decision = classify(p1, threshold)
    doc = {
        "p0": p0,
        "p1": p1,
        "probability": p_target,
        "target_class": args.target_class,
        "label": decision.label,
        "threshold": threshold,
        "path_weights": _branches_json(detail.branches),
        "fingerprint": accounting["fingerprint"],
    }
    if args.format == "table":
        _emit_table([(k, doc[k]) for k in ("probability", "p0", "p1", "label", "threshold")])
    else:
        _emit(doc)
    return EXIT_OK


def _parse_substitutions(spec: ModelSpec, texts: Sequence[str]) -> list[Substitution]:
    subs: list[Substitution] = []
    for text in texts:
        pairs = parse_pairs(text)
        for name, value in pairs.items():
            if value == "":
                subs.append(Substitution(name))
            elif name in spec.bindings:
                subs.append(Substitution(name, raw=float(value)))
            else:
                subs.append(Substitution(name, value=value))
    return subs


def _cmd_counterfactual(args) -> int:
    spec, _, tree, accounting = _load_model(args)
    threshold = args.threshold if args.threshold is not None else spec.threshold
    query = _load_query(args, spec)
    result = counterfactual(
        tree, query, _parse_substitutions(spec, args.sub), threshold=threshold
    )
    doc = {
        "factual": {
            "probability": result.factual.probability,
            "label": result.factual.label,
            "statements": [[s.variable, s.value] for s in result.factual.statements],
        },
        "counterfactual": {
            "probability": result.counterfactual.probability,
            "label": result.counterfactual.label,
            "statements": [[s.variable, s.value] for s in result.counterfactual.statements],
        },
        "delta": result.delta,
        "threshold": threshold,
        "target_class": result.target_class,
        "substitutions": [
            {
                "variable": s.variable,
                "old_value": s.old_value,
                "new_value": s.new_value,
                "old_raw": s.old_raw,
                "new_raw": s.new_raw,
            }
            for s in result.substitutions
        ],
        "fingerprint": accounting["fingerprint"],
    }
    _emit(doc)
    return EXIT_OK


def make_builders(spec: ModelSpec, *, fuzzy: bool, alpha: float = 0.0):
    """Model builder for the bootstrap: induce a tree on the sample, predict
    the positive class for each test record."""

    def build(sample):
        tree = build_tree(sample, spec.variables, spec.bindings, alpha=alpha)

        def predictor(record) -> float:
            query = query_from_record(spec.variables, spec.bindings, record, target_class=1)
            return predict_detailed(tree, query, fuzzy=fuzzy).probability

        return predictor

    return build


def _cmd_evaluate(args) -> int:
    spec, rows, _, accounting = _load_model(args)
    usable = complete_rows(rows, spec)
    threshold = args.threshold if args.threshold is not None else spec.threshold
    kwargs = dict(
        resamples=args.resamples,
        seed=args.seed,
        test_fraction=args.test_fraction,
        threshold=threshold,
        parallel=args.parallel,
    )
    if args.paired:
        comparison = bootstrap_compare(
            usable,
            {
                "fuzzy": make_builders(spec, fuzzy=True, alpha=args.alpha),
                "crisp": make_builders(spec, fuzzy=False, alpha=args.alpha),
            },
            **kwargs,
        )
        if args.format == "table":
            for name in comparison.reports:
                print(report_to_table(comparison.reports[name]))
                print()
        else:
            _emit({**comparison_to_json(comparison), "fingerprint": accounting["fingerprint"]})
        return EXIT_OK
    report = bootstrap_evaluate(
        usable, make_builders(spec, fuzzy=True, alpha=args.alpha), model_name="fuzzy", **kwargs
    )
    if args.format == "table":
        print(report_to_table(report))
    else:
        _emit({**report_to_json(report), "fingerprint": accounting["fingerprint"]})
    return EXIT_OK


def _cmd_export_tree(args) -> int:
    _, _, tree, _ = _load_model(args)
    text = tree_to_json(tree)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.spec, args.data, alpha=args.alpha)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "build": _cmd_build,
    "stats": _cmd_stats,
    "predict": _cmd_predict,
    "counterfactual": _cmd_counterfactual,
    "evaluate": _cmd_evaluate,
    "export-tree": _cmd_export_tree,
    "serve": _cmd_serve,
}


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        if not args.verb:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return _COMMANDS[args.verb](args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except UndefinedConditionalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (FptError, OSError, ValueError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
