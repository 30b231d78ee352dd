"""Authoring edits over a knowledge-base directory.

A KB directory holds ``ontology.xml`` and ``rules.xml``. Edits are explicit
records (the CLI and the service share this one audited pathway), applied
to the in-memory trees; a rejected edit never touches disk. Writers take an
advisory lock on the directory and replace files atomically (temp file +
rename), so a crash cannot leave a half-written KB.
"""
from __future__ import annotations

import dataclasses
import fcntl
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateName,
    DuplicateSlot,
    EditError,
    EmptyRule,
    LastValue,
    MissingFile,
    PathNotFound,
)
from .lexicon import LintReport, check_rulebase
from .model import (
    MUST_DIFFER,
    MUST_EQUAL,
    Concept,
    Context,
    Finding,
    Model,
    Ontology,
    Regulation,
    Rule,
    RuleBase,
    validate_ontology,
    validate_rulebase,
)
from .textnorm import DEFAULT_POLICY, normalize
from .xmlio import (
    ParseIssue,
    ParseResult,
    parse_ontology,
    parse_rulebase,
    serialize_ontology,
    serialize_rulebase,
)

ONTOLOGY_FILE = "ontology.xml"
RULES_FILE = "rules.xml"
LOCK_FILE = ".rcses.lock"


@dataclass(frozen=True)
class OntologyEdit:
    """For add-* kinds the path's last component is the new leaf name."""

    kind: str  # add-regulation | add-context | add-concept | add-value | rename | delete
    path: tuple[str, ...]
    name: str | None = None  # rename payload


@dataclass(frozen=True)
class RuleEdit:
    kind: str  # add-model | add-rule | add-finding | set-consequent | rename | delete
    path: tuple = ()
    name: str | None = None  # rename payload
    rule: Rule | None = None  # add-rule payload
    finding: Finding | None = None  # add-finding payload
    consequent: str | None = None  # set-consequent payload


def _same(a: str, b: str) -> bool:
    return normalize(a) == normalize(b)


def _index_of(items, name: str, what: str) -> int:
    for i, item in enumerate(items):
        if _same(item.name, name):
            return i
    raise PathNotFound(f"no {what} named {name!r}", target=name)


def _check_new_name(items, name: str, what: str):
    for item in items:
        if _same(item.name, name):
            raise DuplicateName(f"a {what} named {name!r} already exists", target=name)


def _arity(edit_kind: str, path_len: int, expected: dict[str, int]):
    want = expected.get(edit_kind)
    if want is None:
        raise EditError(f"unknown edit kind {edit_kind!r}")
    if path_len != want:
        raise EditError(f"{edit_kind} expects a path of {want} component(s), got {path_len}")


def apply_ontology_edit(ontology: Ontology, edit: OntologyEdit) -> Ontology:
    """Return a new ontology with the edit applied; the input is untouched."""
    kind, path = edit.kind, tuple(edit.path)
    if kind == "rename" or kind == "delete":
        if not 1 <= len(path) <= 4:
            raise EditError(f"{kind} expects a path of 1..4 components, got {len(path)}")
    else:
        _arity(kind, len(path), {
            "add-regulation": 1,
            "add-context": 2,
            "add-concept": 3,
            "add-value": 4,
        })

    regulations = list(ontology.regulations)

    if kind == "add-regulation":
        _check_new_name(regulations, path[0], "regulation")
        regulations.append(Regulation(name=path[0]))
        return Ontology(regulations=tuple(regulations))

    if kind == "add-context":
        ri = _index_of(regulations, path[0], "regulation")
        contexts = list(regulations[ri].contexts)
        _check_new_name(contexts, path[1], "context")
        contexts.append(Context(name=path[1]))
        regulations[ri] = dataclasses.replace(regulations[ri], contexts=tuple(contexts))
        return Ontology(regulations=tuple(regulations))

    if kind == "add-concept":
        ri = _index_of(regulations, path[0], "regulation")
        contexts = list(regulations[ri].contexts)
        ci = _index_of(contexts, path[1], "context")
        concepts = list(contexts[ci].concepts)
        _check_new_name(concepts, path[2], "concept")
        # empty domain is allowed transiently; saving validates it away
        concepts.append(Concept(name=path[2], values=()))
        contexts[ci] = dataclasses.replace(contexts[ci], concepts=tuple(concepts))
        regulations[ri] = dataclasses.replace(regulations[ri], contexts=tuple(contexts))
        return Ontology(regulations=tuple(regulations))

    if kind == "add-value":
        ri = _index_of(regulations, path[0], "regulation")
        contexts = list(regulations[ri].contexts)
        ci = _index_of(contexts, path[1], "context")
        concepts = list(contexts[ci].concepts)
        ki = _index_of(concepts, path[2], "concept")
        values = list(concepts[ki].values)
        for value in values:
            if _same(value, path[3]):
                raise DuplicateName(f"value {path[3]!r} already exists", target=path[3])
        values.append(path[3])
        concepts[ki] = dataclasses.replace(concepts[ki], values=tuple(values))
        contexts[ci] = dataclasses.replace(contexts[ci], concepts=tuple(concepts))
        regulations[ri] = dataclasses.replace(regulations[ri], contexts=tuple(contexts))
        return Ontology(regulations=tuple(regulations))

    if kind == "rename" and edit.name is None:
        raise EditError("rename needs a new name")

    # rename / delete share path resolution
    ri = _index_of(regulations, path[0], "regulation")
    if len(path) == 1:
        if kind == "delete":
            del regulations[ri]
        else:
            _check_new_name(
                [r for i, r in enumerate(regulations) if i != ri], edit.name, "regulation"
            )
            regulations[ri] = dataclasses.replace(regulations[ri], name=edit.name)
        return Ontology(regulations=tuple(regulations))

    contexts = list(regulations[ri].contexts)
    ci = _index_of(contexts, path[1], "context")
    if len(path) == 2:
        if kind == "delete":
            del contexts[ci]
        else:
            _check_new_name([c for i, c in enumerate(contexts) if i != ci], edit.name, "context")
            contexts[ci] = dataclasses.replace(contexts[ci], name=edit.name)
        regulations[ri] = dataclasses.replace(regulations[ri], contexts=tuple(contexts))
        return Ontology(regulations=tuple(regulations))

    concepts = list(contexts[ci].concepts)
    ki = _index_of(concepts, path[2], "concept")
    if len(path) == 3:
        if kind == "delete":
            del concepts[ki]
        else:
            _check_new_name([c for i, c in enumerate(concepts) if i != ki], edit.name, "concept")
            concepts[ki] = dataclasses.replace(concepts[ki], name=edit.name)
    else:
        values = list(concepts[ki].values)
        vi = next((i for i, v in enumerate(values) if _same(v, path[3])), None)
        if vi is None:
            raise PathNotFound(f"no value named {path[3]!r}", target=path[3])
        if kind == "delete":
            if len(values) == 1:
                raise LastValue(f"{path[3]!r} is the only value of {concepts[ki].name!r}")
            del values[vi]
        else:
            for i, value in enumerate(values):
                if i != vi and _same(value, edit.name):
                    raise DuplicateName(f"value {edit.name!r} already exists", target=edit.name)
            values[vi] = edit.name
        concepts[ki] = dataclasses.replace(concepts[ki], values=tuple(values))
    contexts[ci] = dataclasses.replace(contexts[ci], concepts=tuple(concepts))
    regulations[ri] = dataclasses.replace(regulations[ri], contexts=tuple(contexts))
    return Ontology(regulations=tuple(regulations))


def _check_rule_payload(rule: Rule):
    if not rule.findings:
        raise EmptyRule(f"rule {rule.name!r} has no findings")
    slots = set()
    for finding in rule.findings:
        key = (normalize(finding.concept), normalize(finding.property))
        if key in slots:
            raise DuplicateSlot(
                f"rule {rule.name!r} tests ({finding.concept!r}, {finding.property!r}) twice"
            )
        slots.add(key)


def apply_rule_edit(rulebase: RuleBase, edit: RuleEdit) -> RuleBase:
    """Return a new rulebase with the edit applied; the input is untouched."""
    kind, path = edit.kind, tuple(edit.path)
    models = list(rulebase.models)

    if kind == "add-model":
        _arity(kind, len(path), {"add-model": 1})
        _check_new_name(models, path[0], "model")
        models.append(Model(name=path[0]))
        return RuleBase(models=tuple(models))

    if kind == "add-rule":
        _arity(kind, len(path), {"add-rule": 1})
        if edit.rule is None:
            raise EditError("add-rule needs a rule payload")
        mi = _index_of(models, path[0], "model")
        rules = list(models[mi].rules)
        _check_new_name(rules, edit.rule.name, "rule")
        _check_rule_payload(edit.rule)
        rules.append(edit.rule)
        models[mi] = dataclasses.replace(models[mi], rules=tuple(rules))
        return RuleBase(models=tuple(models))

    if kind == "add-finding":
        _arity(kind, len(path), {"add-finding": 2})
        if edit.finding is None:
            raise EditError("add-finding needs a finding payload")
        mi = _index_of(models, path[0], "model")
        rules = list(models[mi].rules)
        ri = _index_of(rules, path[1], "rule")
        draft = dataclasses.replace(rules[ri], findings=rules[ri].findings + (edit.finding,))
        _check_rule_payload(draft)
        rules[ri] = draft
        models[mi] = dataclasses.replace(models[mi], rules=tuple(rules))
        return RuleBase(models=tuple(models))

    if kind == "set-consequent":
        _arity(kind, len(path), {"set-consequent": 2})
        if not edit.consequent:
            raise EditError("set-consequent needs a consequent text")
        mi = _index_of(models, path[0], "model")
        rules = list(models[mi].rules)
        ri = _index_of(rules, path[1], "rule")
        rules[ri] = dataclasses.replace(rules[ri], consequent=edit.consequent)
        models[mi] = dataclasses.replace(models[mi], rules=tuple(rules))
        return RuleBase(models=tuple(models))

    if kind not in ("rename", "delete"):
        raise EditError(f"unknown edit kind {kind!r}")
    if kind == "rename" and edit.name is None:
        raise EditError("rename needs a new name")
    if not 1 <= len(path) <= 3:
        raise EditError(f"{kind} expects a path of 1..3 components, got {len(path)}")

    mi = _index_of(models, path[0], "model")
    if len(path) == 1:
        if kind == "delete":
            del models[mi]
        else:
            _check_new_name([m for i, m in enumerate(models) if i != mi], edit.name, "model")
            models[mi] = dataclasses.replace(models[mi], name=edit.name)
        return RuleBase(models=tuple(models))

    rules = list(models[mi].rules)
    ri = _index_of(rules, path[1], "rule")
    if len(path) == 2:
        if kind == "delete":
            del rules[ri]
        else:
            _check_new_name([r for i, r in enumerate(rules) if i != ri], edit.name, "rule")
            rules[ri] = dataclasses.replace(rules[ri], name=edit.name)
    else:
        if kind == "rename":
            raise EditError("findings have no name to rename")
        index = path[2]
        findings = list(rules[ri].findings)
        if not isinstance(index, int) or not 1 <= index <= len(findings):
            raise PathNotFound(f"rule {rules[ri].name!r} has no finding [{index}]", target=index)
        if len(findings) == 1:
            raise EmptyRule(f"cannot delete the only finding of {rules[ri].name!r}")
        del findings[index - 1]
        rules[ri] = dataclasses.replace(rules[ri], findings=tuple(findings))
    models[mi] = dataclasses.replace(models[mi], rules=tuple(rules))
    return RuleBase(models=tuple(models))


# -- JSON edit records -------------------------------------------------------

_POLARITIES = {MUST_EQUAL: MUST_EQUAL, MUST_DIFFER: MUST_DIFFER}


def _finding_from_dict(raw: dict) -> Finding:
    try:
        polarity = raw.get("polarity", MUST_EQUAL)
        if polarity not in _POLARITIES:
            raise EditError(f"polarity must be {MUST_EQUAL} or {MUST_DIFFER}, got {polarity!r}")
        return Finding(
            concept=raw["concept"],
            property=raw.get("property", "Value"),
            value=raw["value"],
            polarity=polarity,
        )
    except KeyError as exc:
        raise EditError(f"finding payload is missing {exc.args[0]!r}") from None


def edit_from_dict(raw: dict) -> tuple[str, OntologyEdit | RuleEdit]:
    """Decode one JSON edit record; returns ("ontology"|"rules", edit)."""
    doc = raw.get("doc")
    kind = raw.get("kind")
    path = tuple(raw.get("path", ()))
    if doc == "ontology":
        return doc, OntologyEdit(kind=kind, path=path, name=raw.get("name"))
    if doc == "rules":
        rule = None
        if raw.get("rule") is not None:
            payload = raw["rule"]
            try:
                rule = Rule(
                    name=payload["name"],
                    consequent=payload["consequent"],
                    findings=tuple(_finding_from_dict(f) for f in payload.get("findings", [])),
                )
            except KeyError as exc:
                raise EditError(f"rule payload is missing {exc.args[0]!r}") from None
        finding = _finding_from_dict(raw["finding"]) if raw.get("finding") is not None else None
        return doc, RuleEdit(
            kind=kind,
            path=path,
            name=raw.get("name"),
            rule=rule,
            finding=finding,
            consequent=raw.get("consequent"),
        )
    raise EditError(f'edit record needs "doc": "ontology" or "rules", got {doc!r}')


# -- KB directory IO ---------------------------------------------------------


@contextmanager
def kb_lock(directory: str | Path):
    """Advisory exclusive lock over the KB directory (writers only)."""
    path = Path(directory) / LOCK_FILE
    with open(path, "w") as handle:
        fcntl.flock(handle, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


def load_kb(directory: str | Path) -> tuple[ParseResult[Ontology], ParseResult[RuleBase]]:
    directory = Path(directory)
    ontology_path = directory / ONTOLOGY_FILE
    rules_path = directory / RULES_FILE
    for path in (ontology_path, rules_path):
        if not path.is_file():
            raise MissingFile(f"{path} does not exist", path=str(path))
    return (
        parse_ontology(ontology_path.read_bytes()),
        parse_rulebase(rules_path.read_bytes()),
    )


def _write_atomic(path: Path, data: bytes):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as handle:
        handle.write(data)
        handle.flush()
        os.fsync(handle.fileno())
    os.replace(tmp, path)


def save_kb(directory: str | Path, ontology: Ontology, rulebase: RuleBase):
    """Canonically rewrite both documents; callers hold the directory lock."""
    directory = Path(directory)
    problems = validate_ontology(ontology) + validate_rulebase(rulebase)
    if problems:
        first = problems[0]
        raise EditError(f"{first.code}: {first.message}", violations=problems)
    _write_atomic(directory / ONTOLOGY_FILE, serialize_ontology(ontology).data)
    _write_atomic(directory / RULES_FILE, serialize_rulebase(rulebase).data)


@dataclass
class LintOutcome:
    parse_issues: list[ParseIssue]
    report: LintReport | None

    @property
    def exit_status(self) -> int:
        if any(issue.severity == "error" for issue in self.parse_issues):
            return 1
        if self.report is not None and self.report.errors():
            return 1
        return 0

    def as_dict(self) -> dict:
        return {
            "parse_issues": [issue.as_dict() for issue in self.parse_issues],
            "report": self.report.as_dict() if self.report is not None else None,
            "ok": self.exit_status == 0,
        }


def lint_kb(directory: str | Path) -> LintOutcome:
    """Parse then cross-reference the KB directory."""
    ontology_result, rules_result = load_kb(directory)
    issues = ontology_result.issues + rules_result.issues
    if ontology_result.ok and rules_result.ok:
        report = check_rulebase(rules_result.value, ontology_result.value, DEFAULT_POLICY)
    else:
        report = None
    return LintOutcome(parse_issues=issues, report=report)
