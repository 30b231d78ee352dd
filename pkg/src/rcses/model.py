"""In-memory knowledge types: the ontology tree, the rulebase, and lookups.

All types are frozen; the rest of the system shares them freely across
threads and replaces whole snapshots instead of mutating. Stored text keeps
its original spelling — identity is decided on normalized forms (see
:mod:`rcses.textnorm`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .textnorm import DEFAULT_POLICY, NormalizationPolicy, normalize

MUST_EQUAL = "must-equal"
MUST_DIFFER = "must-differ"

#: a working-memory slot: (concept name, property name)
Slot = tuple[str, str]


@dataclass(frozen=True)
class Concept:
    name: str
    values: tuple[str, ...]
    property: str = "Value"


@dataclass(frozen=True)
class Context:
    """One decision context of a regulation; its name is the decision result."""

    name: str
    concepts: tuple[Concept, ...] = ()


@dataclass(frozen=True)
class Regulation:
    name: str
    contexts: tuple[Context, ...] = ()


@dataclass(frozen=True)
class Ontology:
    regulations: tuple[Regulation, ...] = ()


@dataclass(frozen=True)
class Finding:
    """One antecedent: a (concept, property) slot compared against a value."""

    concept: str
    property: str
    value: str
    polarity: str = MUST_EQUAL

    @property
    def slot(self) -> Slot:
        return (self.concept, self.property)


@dataclass(frozen=True)
class Rule:
    name: str
    consequent: str
    findings: tuple[Finding, ...] = ()


@dataclass(frozen=True)
class Model:
    name: str
    rules: tuple[Rule, ...] = ()


@dataclass(frozen=True)
class RuleBase:
    models: tuple[Model, ...] = ()


@dataclass(frozen=True)
class KbSnapshot:
    """Immutable, versioned (ontology, rulebase) pair that sessions pin.

    ``fingerprint`` is a content hash of the canonical serializations;
    ``version`` strictly increases across knowledge-base updates.
    """

    ontology: Ontology
    rulebase: RuleBase
    version: int
    fingerprint: str

    @cached_property
    def concept_index(self) -> dict[str, tuple[Concept, ...]]:
        """Normalized concept name -> every Concept of that name, document order."""
        index: dict[str, list[Concept]] = {}
        for _, _, concept in walk_concepts(self.ontology):
            index.setdefault(normalize(concept.name), []).append(concept)
        return {name: tuple(hits) for name, hits in index.items()}

    def model(self, model_name: str) -> Model | None:
        wanted = normalize(model_name)
        for model in self.rulebase.models:
            if normalize(model.name) == wanted:
                return model
        return None

    def domain(self, concept_name: str, property_name: str) -> tuple[str, ...] | None:
        """Union of value domains for the named (concept, property), or None
        when the ontology does not know the slot."""
        hits = self.concept_index.get(normalize(concept_name))
        if not hits:
            return None
        prop = normalize(property_name)
        values: list[str] = []
        seen: set[str] = set()
        matched = False
        for concept in hits:
            if normalize(concept.property) != prop:
                continue
            matched = True
            for value in concept.values:
                key = normalize(value)
                if key not in seen:
                    seen.add(key)
                    values.append(value)
        return tuple(values) if matched else None


def walk_concepts(ontology: Ontology):
    """Yield (regulation, context, concept) in document order."""
    for regulation in ontology.regulations:
        for context in regulation.contexts:
            for concept in context.concepts:
                yield regulation, context, concept


def list_models(rulebase: RuleBase) -> list[str]:
    """Model names in document order."""
    return [model.name for model in rulebase.models]


def lookup_concept(
    ontology: Ontology,
    concept_name: str,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> list[tuple[Regulation, Context, Concept]]:
    """Every occurrence of ``concept_name`` anywhere in the tree.

    Both sides are normalized before comparison, so passing an already
    normalized name (the usual case) costs nothing extra.
    """
    wanted = normalize(concept_name, policy)
    return [
        (regulation, context, concept)
        for regulation, context, concept in walk_concepts(ontology)
        if normalize(concept.name, policy) == wanted
    ]


def value_domain(concept: Concept) -> list[str]:
    """The concept's values in document order."""
    return list(concept.values)


def rule_arity(rule: Rule) -> int:
    """Number of findings (antecedents) of the rule."""
    return len(rule.findings)


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by a validation pass."""

    code: str
    where: tuple[str, ...]
    message: str


def _find_duplicates(names, policy) -> list[str]:
    seen: set[str] = set()
    dupes: list[str] = []
    for name in names:
        key = normalize(name, policy)
        if key in seen:
            dupes.append(name)
        seen.add(key)
    return dupes


def validate_ontology(
    ontology: Ontology, policy: NormalizationPolicy = DEFAULT_POLICY
) -> list[Violation]:
    """Single pass over every tree-uniqueness and domain invariant."""
    out: list[Violation] = []
    for dup in _find_duplicates((r.name for r in ontology.regulations), policy):
        out.append(Violation("DuplicateName", (dup,), f"duplicate regulation {dup!r}"))
    for regulation in ontology.regulations:
        for dup in _find_duplicates((c.name for c in regulation.contexts), policy):
            out.append(
                Violation(
                    "DuplicateName",
                    (regulation.name, dup),
                    f"duplicate context {dup!r}",
                )
            )
        for context in regulation.contexts:
            where = (regulation.name, context.name)
            for dup in _find_duplicates((c.name for c in context.concepts), policy):
                out.append(
                    Violation("DuplicateName", where + (dup,), f"duplicate concept {dup!r}")
                )
            for concept in context.concepts:
                cwhere = where + (concept.name,)
                if not concept.values:
                    out.append(
                        Violation("EmptyDomain", cwhere, f"concept {concept.name!r} has no values")
                    )
                if not concept.property:
                    out.append(
                        Violation("EmptyProperty", cwhere, f"concept {concept.name!r} has an empty property")
                    )
                for dup in _find_duplicates(concept.values, policy):
                    out.append(
                        Violation("DuplicateName", cwhere + (dup,), f"duplicate value {dup!r}")
                    )
    return out


def validate_rulebase(
    rulebase: RuleBase, policy: NormalizationPolicy = DEFAULT_POLICY
) -> list[Violation]:
    out: list[Violation] = []
    for dup in _find_duplicates((m.name for m in rulebase.models), policy):
        out.append(Violation("DuplicateName", (dup,), f"duplicate model {dup!r}"))
    for model in rulebase.models:
        for dup in _find_duplicates((r.name for r in model.rules), policy):
            out.append(
                Violation("DuplicateName", (model.name, dup), f"duplicate rule {dup!r}")
            )
        for rule in model.rules:
            where = (model.name, rule.name)
            if not rule.findings:
                out.append(Violation("EmptyRule", where, f"rule {rule.name!r} has no findings"))
            slots: set[Slot] = set()
            for finding in rule.findings:
                key = (normalize(finding.concept, policy), normalize(finding.property, policy))
                if key in slots:
                    out.append(
                        Violation(
                            "DuplicateSlot",
                            where + (finding.concept,),
                            f"rule {rule.name!r} tests ({finding.concept!r}, {finding.property!r}) twice",
                        )
                    )
                slots.add(key)
                if finding.polarity not in (MUST_EQUAL, MUST_DIFFER):
                    out.append(
                        Violation(
                            "BadPolarity",
                            where + (finding.concept,),
                            f"finding polarity {finding.polarity!r}",
                        )
                    )
    return out
