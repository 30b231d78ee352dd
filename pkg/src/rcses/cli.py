"""rcses-kb: lint, edit, format and inspect a knowledge-base directory.

Exit codes: 0 ok, 1 content violations, 2 usage or IO problems.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builder import (
    apply_ontology_edit,
    apply_rule_edit,
    edit_from_dict,
    kb_lock,
    lint_kb,
    load_kb,
    save_kb,
)
from .errors import EditError, MissingFile, RcsesError
from .model import rule_arity

OK, VIOLATIONS, USAGE = 0, 1, 2


def _print_issues(issues):
    for issue in issues:
        print(f"{issue.severity}: {issue.code} at {issue.path}: {issue.message}")


def _print_report(report):
    for v in report.violations:
        line = (
            f"{v.severity}: {v.code} model={v.model} rule={v.rule} "
            f"finding={v.finding} token={v.token}"
        )
        if v.suggestions:
            line += " suggestions=" + ", ".join(v.suggestions)
        print(line)
    for code, count in sorted(report.counts.items()):
        print(f"{code}: {count}")


def cmd_lint(args) -> int:
    outcome = lint_kb(args.directory)
    if args.json:
        print(json.dumps(outcome.as_dict(), ensure_ascii=False, indent=2))
        return outcome.exit_status
    _print_issues(outcome.parse_issues)
    if outcome.report is not None:
        _print_report(outcome.report)
        if outcome.report.ok and not outcome.parse_issues:
            print("ok: every rule token resolves in the ontology")
    return outcome.exit_status


def cmd_edit(args) -> int:
    try:
        raw = json.loads(Path(args.edit_file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read edits: {exc}", file=sys.stderr)
        return USAGE
    if not isinstance(raw, list):
        print("error: the edit file must hold a JSON array of edit records", file=sys.stderr)
        return USAGE
    ontology_result, rules_result = load_kb(args.directory)
    issues = ontology_result.errors() + rules_result.errors()
    if issues:
        _print_issues(issues)
        return VIOLATIONS
    ontology, rulebase = ontology_result.value, rules_result.value
    for position, record in enumerate(raw, start=1):
        try:
            doc, edit = edit_from_dict(record)
            if doc == "ontology":
                ontology = apply_ontology_edit(ontology, edit)
            else:
                rulebase = apply_rule_edit(rulebase, edit)
        except EditError as exc:
            print(f"error: edit {position}: {exc.code}: {exc.message}", file=sys.stderr)
            return VIOLATIONS
    with kb_lock(args.directory):
        try:
            save_kb(args.directory, ontology, rulebase)
        except EditError as exc:
            print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
            return VIOLATIONS
    print(f"applied {len(raw)} edit(s)")
    return OK


def cmd_fmt(args) -> int:
    ontology_result, rules_result = load_kb(args.directory)
    issues = ontology_result.errors() + rules_result.errors()
    if issues:
        _print_issues(issues)
        return VIOLATIONS
    with kb_lock(args.directory):
        save_kb(args.directory, ontology_result.value, rules_result.value)
    print("formatted ontology.xml and rules.xml")
    return OK


def cmd_show(args) -> int:
    ontology_result, rules_result = load_kb(args.directory)
    issues = ontology_result.errors() + rules_result.errors()
    if issues:
        _print_issues(issues)
        return VIOLATIONS
    if args.model is None:
        for regulation in ontology_result.value.regulations:
            print(f"regulation: {regulation.name}")
            for context in regulation.contexts:
                print(f"  context: {context.name}")
                for concept in context.concepts:
                    print(f"    concept: {concept.name} = {', '.join(concept.values)}")
    for model in rules_result.value.models:
        if args.model is not None and model.name != args.model:
            continue
        print(f"model: {model.name} ({len(model.rules)} rules)")
        for rule in model.rules:
            print(f"  {rule.name} -> {rule.consequent} [{rule_arity(rule)} findings]")
            for finding in rule.findings:
                op = "=" if finding.polarity == "must-equal" else "!="
                print(f"    {finding.concept}.{finding.property} {op} {finding.value}")
    if args.model is not None and all(
        model.name != args.model for model in rules_result.value.models
    ):
        print(f"error: no model named {args.model!r}", file=sys.stderr)
        return VIOLATIONS
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcses-kb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    lint = sub.add_parser("lint", help="cross-reference rules against the ontology")
    lint.add_argument("directory")
    lint.add_argument("--json", action="store_true", help="emit the report as JSON")
    lint.set_defaults(func=cmd_lint)

    edit = sub.add_parser("edit", help="apply a JSON edit batch")
    edit.add_argument("directory")
    edit.add_argument("--edit-file", required=True)
    edit.set_defaults(func=cmd_edit)

    fmt = sub.add_parser("fmt", help="rewrite both documents canonically")
    fmt.add_argument("directory")
    fmt.set_defaults(func=cmd_fmt)

    show = sub.add_parser("show", help="print the KB structure")
    show.add_argument("directory")
    show.add_argument("--model")
    show.set_defaults(func=cmd_show)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingFile as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return USAGE
    except RcsesError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return VIOLATIONS


if __name__ == "__main__":
    sys.exit(main())
