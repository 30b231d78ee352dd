"""Reading and canonical writing of the two knowledge documents.

The on-disk formats are small attribute-only XML dialects. Parsing is done
by a dedicated recursive-descent scanner rather than a stock XML parser for
two reasons: issue paths must point at the offending node
(``/KSA_Civil_Regulation/Model[1]/Rule[2]``), and real documents in the
wild close tags with case drift (``<Model>...</model>``), which a
conforming parser rejects outright.

Canonical output is deterministic: UTF-8, no XML declaration, 2-space
indentation, one element per line, fixed attribute order, double quotes,
minimal escaping, self-closing childless elements, trailing newline.
Serializing any parsed document reaches a byte-stable fixed point in one
pass.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Generic, TypeVar

from .model import (
    MUST_DIFFER,
    MUST_EQUAL,
    Concept,
    Context,
    Finding,
    KbSnapshot,
    Model,
    Ontology,
    Regulation,
    Rule,
    RuleBase,
)
from .textnorm import normalize

T = TypeVar("T")

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class ParseIssue:
    severity: str
    path: str
    code: str
    message: str

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "path": self.path,
            "code": self.code,
            "message": self.message,
        }


@dataclass
class ParseResult(Generic[T]):
    """Outcome of a parse: ``value`` is set iff no error-severity issue."""

    value: T | None
    issues: list[ParseIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.value is not None

    def errors(self) -> list[ParseIssue]:
        return [issue for issue in self.issues if issue.severity == ERROR]


@dataclass(frozen=True)
class CanonicalDocument:
    data: bytes
    kind: str  # "ontology" | "rulebase"


class _WellFormednessError(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(message)
        self.path = path
        self.message = message


@dataclass
class _RawElement:
    name: str
    path: str
    attrs: list[tuple[str, str]] = field(default_factory=list)
    children: list["_RawElement"] = field(default_factory=list)

    def attr(self, *names: str) -> str | None:
        for wanted in names:
            for name, value in self.attrs:
                if name == wanted:
                    return value
        return None


_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}

_NAME_END = set(' \t\r\n>/="\'<&?')


class _Scanner:
    """Single-pass scanner for the attribute-only XML subset."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> _RawElement:
        self._skip_prolog()
        root = self._element(parent_path="", counts={})
        self._skip_misc()
        if self.pos < len(self.text):
            raise _WellFormednessError(root.path, "content after the root element")
        return root

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def _skip_comment(self) -> bool:
        if self.text.startswith("<!--", self.pos):
            end = self.text.find("-->", self.pos + 4)
            if end < 0:
                raise _WellFormednessError("/", "unterminated comment")
            self.pos = end + 3
            return True
        return False

    def _skip_misc(self):
        while True:
            self._skip_ws()
            if not self._skip_comment():
                return

    def _skip_prolog(self):
        self._skip_ws()
        if self.text.startswith("<?xml", self.pos):
            end = self.text.find("?>", self.pos)
            if end < 0:
                raise _WellFormednessError("/", "unterminated XML declaration")
            decl = self.text[self.pos : end].lower()
            if "encoding" in decl:
                enc = decl.split("encoding", 1)[1]
                enc = enc.split("=", 1)[1] if "=" in enc else enc
                enc = enc.strip().strip("\"'").split("\"")[0].split("'")[0].strip()
                if enc not in ("utf-8", "utf8"):
                    raise _WellFormednessError(
                        "/", f"unsupported encoding {enc!r}; documents are UTF-8"
                    )
            self.pos = end + 2
        self._skip_misc()

    def _name(self, path: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _NAME_END:
            self.pos += 1
        if self.pos == start:
            raise _WellFormednessError(path or "/", "expected a name")
        return self.text[start : self.pos]

    def _decode(self, raw: str, path: str) -> str:
        if "&" not in raw:
            return raw
        out: list[str] = []
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch != "&":
                out.append(ch)
                i += 1
                continue
            end = raw.find(";", i + 1)
            if end < 0:
                raise _WellFormednessError(path, "bare '&' in attribute value")
            entity = raw[i + 1 : end]
            try:
                if entity.startswith(("#x", "#X")):
                    out.append(chr(int(entity[2:], 16)))
                elif entity.startswith("#"):
                    out.append(chr(int(entity[1:])))
                elif entity in _ENTITIES:
                    out.append(_ENTITIES[entity])
                else:
                    raise ValueError
            except ValueError:
                raise _WellFormednessError(path, f"unknown entity &{entity};") from None
            i = end + 1
        return "".join(out)

    def _element(self, parent_path: str, counts: dict[str, int]) -> _RawElement:
        if self.pos >= len(self.text) or self.text[self.pos] != "<":
            raise _WellFormednessError(parent_path or "/", "expected an element")
        self.pos += 1
        name = self._name(parent_path)
        if parent_path:
            counts[name] = counts.get(name, 0) + 1
            path = f"{parent_path}/{name}[{counts[name]}]"
        else:
            path = f"/{name}"
        element = _RawElement(name=name, path=path)
        seen_attrs: set[str] = set()
        while True:
            self._skip_ws()
            if self.pos >= len(self.text):
                raise _WellFormednessError(path, "unterminated start tag")
            if self.text.startswith("/>", self.pos):
                self.pos += 2
                return element
            if self.text[self.pos] == ">":
                self.pos += 1
                break
            attr = self._name(path)
            self._skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != "=":
                raise _WellFormednessError(path, f"attribute {attr!r} has no value")
            self.pos += 1
            self._skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] not in "\"'":
                raise _WellFormednessError(path, f"attribute {attr!r} value is not quoted")
            quote = self.text[self.pos]
            self.pos += 1
            end = self.text.find(quote, self.pos)
            if end < 0:
                raise _WellFormednessError(path, f"attribute {attr!r} value is not terminated")
            value = self._decode(self.text[self.pos : end], path)
            self.pos = end + 1
            if attr in seen_attrs:
                raise _WellFormednessError(path, f"duplicate attribute {attr!r}")
            seen_attrs.add(attr)
            element.attrs.append((attr, value))
        child_counts: dict[str, int] = {}
        while True:
            lt = self.text.find("<", self.pos)
            if lt < 0:
                raise _WellFormednessError(path, f"element {name!r} is never closed")
            if self.text[self.pos : lt].strip():
                raise _WellFormednessError(path, "text content is not allowed here")
            self.pos = lt
            if self._skip_comment():
                continue
            if self.text.startswith("</", self.pos):
                self.pos += 2
                closing = self._name(path)
                # tolerate case drift between open and close tags
                if closing != name and closing.casefold() != name.casefold():
                    raise _WellFormednessError(
                        path, f"mismatched closing tag </{closing}> for <{name}>"
                    )
                self._skip_ws()
                if self.pos >= len(self.text) or self.text[self.pos] != ">":
                    raise _WellFormednessError(path, "malformed closing tag")
                self.pos += 1
                return element
            element.children.append(self._element(path, child_counts))


def _scan(data: bytes) -> tuple[_RawElement | None, list[ParseIssue]]:
    if data.startswith(b"\xef\xbb\xbf"):
        data = data[3:]
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        issue = ParseIssue(
            ERROR, "/", "WellFormedness", f"not UTF-8: {exc.reason} at byte {exc.start}"
        )
        return None, [issue]
    try:
        return _Scanner(text).parse(), []
    except _WellFormednessError as exc:
        return None, [ParseIssue(ERROR, exc.path, "WellFormedness", exc.message)]
    except RecursionError:
        return None, [ParseIssue(ERROR, "/", "WellFormedness", "document nested too deeply")]


def _clean(value: str) -> str:
    # attribute text is stored whitespace-canonical; spelling is preserved
    return " ".join(value.split())


class _Validator:
    def __init__(self):
        self.issues: list[ParseIssue] = []

    def error(self, path: str, code: str, message: str):
        self.issues.append(ParseIssue(ERROR, path, code, message))

    def warning(self, path: str, code: str, message: str):
        self.issues.append(ParseIssue(WARNING, path, code, message))

    @property
    def failed(self) -> bool:
        return any(issue.severity == ERROR for issue in self.issues)

    def required(self, element: _RawElement, attr: str) -> str | None:
        raw = element.attr(attr)
        if raw is None:
            self.error(element.path, "AttributeMissing", f"<{element.name}> requires {attr}")
            return None
        value = _clean(raw)
        if not value:
            self.error(element.path, "AttributeMissing", f"{attr} on <{element.name}> is empty")
            return None
        return value

    def known_attrs(self, element: _RawElement, known: tuple[str, ...]):
        for name, _ in element.attrs:
            if name not in known:
                self.warning(
                    element.path, "UnknownAttribute", f"<{element.name}> does not use {name}"
                )

    def unique(self, entries: list[tuple[str, tuple[str, ...], str]], code: str, what: str):
        """entries: (issue path, normalized key, display name)."""
        seen: set[tuple[str, ...]] = set()
        for path, key, display in entries:
            if key in seen:
                self.error(path, code, f"duplicate {what} {display!r}")
            seen.add(key)


def parse_ontology(data: bytes) -> ParseResult[Ontology]:
    """Parse an ontology document; issues carry element paths."""
    root, scan_issues = _scan(data)
    if root is None:
        return ParseResult(None, scan_issues)
    check = _Validator()
    if root.name != "KSA_Civil_Ontology":
        check.error(root.path, "UnknownElement", f"expected <KSA_Civil_Ontology>, found <{root.name}>")
        return ParseResult(None, check.issues)
    check.known_attrs(root, ())
    regulations: list[Regulation] = []
    reg_names: list[tuple[str, tuple[str, ...], str]] = []
    for parent in root.children:
        if parent.name != "OntParent":
            check.error(parent.path, "UnknownElement", f"<{parent.name}> is not part of the ontology format")
            continue
        check.known_attrs(parent, ("ParentName",))
        reg_name = check.required(parent, "ParentName")
        if reg_name is not None:
            reg_names.append((parent.path, (normalize(reg_name),), reg_name))
        contexts: list[Context] = []
        ctx_names: list[tuple[str, tuple[str, ...], str]] = []
        for child in parent.children:
            if child.name != "OntChild":
                check.error(child.path, "UnknownElement", f"<{child.name}> is not allowed under <OntParent>")
                continue
            check.known_attrs(child, ("ChildName",))
            ctx_name = check.required(child, "ChildName")
            if ctx_name is not None:
                ctx_names.append((child.path, (normalize(ctx_name),), ctx_name))
            concepts: list[Concept] = []
            concept_names: list[tuple[str, tuple[str, ...], str]] = []
            for node in child.children:
                if node.name != "OntConcept":
                    check.error(node.path, "UnknownElement", f"<{node.name}> is not allowed under <OntChild>")
                    continue
                check.known_attrs(node, ("ConceptName",))
                concept_name = check.required(node, "ConceptName")
                if concept_name is not None:
                    concept_names.append((node.path, (normalize(concept_name),), concept_name))
                values: list[str] = []
                value_names: list[tuple[str, tuple[str, ...], str]] = []
                saw_val = False
                for leaf in node.children:
                    if leaf.name != "OntVal":
                        check.error(leaf.path, "UnknownElement", f"<{leaf.name}> is not allowed under <OntConcept>")
                        continue
                    saw_val = True
                    check.known_attrs(leaf, ("ValueName",))
                    if leaf.children:
                        check.error(leaf.children[0].path, "UnknownElement", "<OntVal> has no children")
                    value = check.required(leaf, "ValueName")
                    if value is not None:
                        values.append(value)
                        value_names.append((leaf.path, (normalize(value),), value))
                if not saw_val:
                    check.error(node.path, "EmptyDomain", f"concept {concept_name or '?'} has no <OntVal>")
                check.unique(value_names, "DuplicateName", "value")
                if concept_name is not None:
                    concepts.append(Concept(name=concept_name, values=tuple(values)))
            check.unique(concept_names, "DuplicateName", "concept")
            if ctx_name is not None:
                contexts.append(Context(name=ctx_name, concepts=tuple(concepts)))
        check.unique(ctx_names, "DuplicateName", "context")
        if reg_name is not None:
            regulations.append(Regulation(name=reg_name, contexts=tuple(contexts)))
    check.unique(reg_names, "DuplicateName", "regulation")
    if check.failed:
        return ParseResult(None, check.issues)
    return ParseResult(Ontology(regulations=tuple(regulations)), check.issues)


def parse_rulebase(data: bytes) -> ParseResult[RuleBase]:
    """Parse a rulebase document.

    Persisted session-state attributes (NoTrueFinding/NoTrueFindings on
    rules, ExistInWM on findings) are accepted and discarded: live values
    exist only inside sessions, and canonical output always writes the rest
    state.
    """
    root, scan_issues = _scan(data)
    if root is None:
        return ParseResult(None, scan_issues)
    check = _Validator()
    if root.name != "KSA_Civil_Regulation":
        check.error(root.path, "UnknownElement", f"expected <KSA_Civil_Regulation>, found <{root.name}>")
        return ParseResult(None, check.issues)
    check.known_attrs(root, ())
    models: list[Model] = []
    model_names: list[tuple[str, tuple[str, ...], str]] = []
    for node in root.children:
        if node.name != "Model":
            check.error(node.path, "UnknownElement", f"<{node.name}> is not part of the rules format")
            continue
        check.known_attrs(node, ("ModelName",))
        model_name = check.required(node, "ModelName")
        if model_name is not None:
            model_names.append((node.path, (normalize(model_name),), model_name))
        rules: list[Rule] = []
        rule_names: list[tuple[str, tuple[str, ...], str]] = []
        for rule_el in node.children:
            if rule_el.name != "Rule":
                check.error(rule_el.path, "UnknownElement", f"<{rule_el.name}> is not allowed under <Model>")
                continue
            check.known_attrs(rule_el, ("Name", "RegItem", "NoTrueFinding", "NoTrueFindings"))
            rule_name = check.required(rule_el, "Name")
            if rule_name is not None:
                rule_names.append((rule_el.path, (normalize(rule_name),), rule_name))
            consequent = check.required(rule_el, "RegItem")
            findings: list[Finding] = []
            slots: list[tuple[str, tuple[str, ...], str]] = []
            saw_finding = False
            for finding_el in rule_el.children:
                if finding_el.name != "Finding":
                    check.error(finding_el.path, "UnknownElement", f"<{finding_el.name}> is not allowed under <Rule>")
                    continue
                saw_finding = True
                check.known_attrs(finding_el, ("Cpt", "Prop", "Val", "Equal", "ExistInWM"))
                if finding_el.children:
                    check.error(finding_el.children[0].path, "UnknownElement", "<Finding> has no children")
                concept = check.required(finding_el, "Cpt")
                prop = check.required(finding_el, "Prop")
                value = check.required(finding_el, "Val")
                equal = check.required(finding_el, "Equal")
                polarity = None
                if equal == "Yes":
                    polarity = MUST_EQUAL
                elif equal == "No":
                    polarity = MUST_DIFFER
                elif equal is not None:
                    check.error(finding_el.path, "BadPolarity", f"Equal must be Yes or No, found {equal!r}")
                if concept is not None and prop is not None:
                    slots.append((finding_el.path, (normalize(concept), normalize(prop)), concept))
                if None not in (concept, prop, value, polarity):
                    findings.append(
                        Finding(concept=concept, property=prop, value=value, polarity=polarity)
                    )
            if not saw_finding:
                check.error(rule_el.path, "EmptyRule", f"rule {rule_name or '?'} has no <Finding>")
            check.unique(slots, "DuplicateSlot", "slot concept")
            if rule_name is not None and consequent is not None:
                rules.append(Rule(name=rule_name, consequent=consequent, findings=tuple(findings)))
        check.unique(rule_names, "DuplicateName", "rule")
        if model_name is not None:
            models.append(Model(name=model_name, rules=tuple(rules)))
    check.unique(model_names, "DuplicateName", "model")
    if check.failed:
        return ParseResult(None, check.issues)
    return ParseResult(RuleBase(models=tuple(models)), check.issues)


# -- canonical output --------------------------------------------------------


def _esc(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


class _Writer:
    def __init__(self):
        self.lines: list[str] = []

    def tag(self, depth: int, name: str, attrs: list[tuple[str, str]], leaf: bool):
        rendered = "".join(f' {attr}="{_esc(value)}"' for attr, value in attrs)
        self.lines.append(f"{'  ' * depth}<{name}{rendered}{'/' if leaf else ''}>")

    def close(self, depth: int, name: str):
        self.lines.append(f"{'  ' * depth}</{name}>")

    def bytes(self) -> bytes:
        return ("\n".join(self.lines) + "\n").encode("utf-8")


def serialize_ontology(ontology: Ontology) -> CanonicalDocument:
    w = _Writer()
    w.tag(0, "KSA_Civil_Ontology", [], leaf=not ontology.regulations)
    for regulation in ontology.regulations:
        w.tag(1, "OntParent", [("ParentName", regulation.name)], leaf=not regulation.contexts)
        for context in regulation.contexts:
            w.tag(2, "OntChild", [("ChildName", context.name)], leaf=not context.concepts)
            for concept in context.concepts:
                w.tag(3, "OntConcept", [("ConceptName", concept.name)], leaf=not concept.values)
                for value in concept.values:
                    w.tag(4, "OntVal", [("ValueName", value)], leaf=True)
                if concept.values:
                    w.close(3, "OntConcept")
            if context.concepts:
                w.close(2, "OntChild")
        if regulation.contexts:
            w.close(1, "OntParent")
    if ontology.regulations:
        w.close(0, "KSA_Civil_Ontology")
    return CanonicalDocument(data=w.bytes(), kind="ontology")


def serialize_rulebase(rulebase: RuleBase) -> CanonicalDocument:
    w = _Writer()
    w.tag(0, "KSA_Civil_Regulation", [], leaf=not rulebase.models)
    for model in rulebase.models:
        w.tag(1, "Model", [("ModelName", model.name)], leaf=not model.rules)
        for rule in model.rules:
            attrs = [("Name", rule.name), ("RegItem", rule.consequent), ("NoTrueFinding", "0")]
            w.tag(2, "Rule", attrs, leaf=not rule.findings)
            for finding in rule.findings:
                w.tag(
                    3,
                    "Finding",
                    [
                        ("Cpt", finding.concept),
                        ("Prop", finding.property),
                        ("Val", finding.value),
                        ("Equal", "Yes" if finding.polarity == MUST_EQUAL else "No"),
                        ("ExistInWM", "No"),
                    ],
                    leaf=True,
                )
            if rule.findings:
                w.close(2, "Rule")
        if model.rules:
            w.close(1, "Model")
    if rulebase.models:
        w.close(0, "KSA_Civil_Regulation")
    return CanonicalDocument(data=w.bytes(), kind="rulebase")


def snapshot(ontology: Ontology, rulebase: RuleBase, version: int) -> KbSnapshot:
    """Build an immutable snapshot; the fingerprint hashes canonical bytes."""
    digest = hashlib.sha256()
    digest.update(serialize_ontology(ontology).data)
    digest.update(serialize_rulebase(rulebase).data)
    return KbSnapshot(
        ontology=ontology,
        rulebase=rulebase,
        version=version,
        fingerprint=digest.hexdigest(),
    )
