"""Cross-reference checking between the rulebase and the ontology.

Every token a rule uses (concept, property, value) must resolve inside the
ontology, otherwise consultations silently never fire the rule. Unresolved
tokens come back as violations with ranked correction candidates.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .model import MUST_EQUAL, Ontology, RuleBase, walk_concepts
from .textnorm import DEFAULT_POLICY, NormalizationPolicy, edit_distance, normalize

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class LintViolation:
    severity: str
    code: str
    model: str
    rule: str
    finding: int  # 1-based index inside the rule
    token: str
    suggestions: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "model": self.model,
            "rule": self.rule,
            "finding": self.finding,
            "token": self.token,
            "suggestions": list(self.suggestions),
        }


@dataclass(frozen=True)
class LintReport:
    violations: tuple[LintViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @cached_property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for violation in self.violations:
            out[violation.code] = out.get(violation.code, 0) + 1
        return out

    def errors(self) -> list[LintViolation]:
        return [v for v in self.violations if v.severity == ERROR]

    def as_dict(self) -> dict:
        return {
            "violations": [v.as_dict() for v in self.violations],
            "counts": self.counts,
        }


def suggest_corrections(
    token: str,
    ontology: Ontology,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    k: int = 3,
) -> list[str]:
    """Up to ``k`` ontology names close to ``token``.

    Distance is Levenshtein over normalized forms; candidates beyond
    max(2, ceil(len/4)) are dropped. Ties keep document order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    wanted = normalize(token, policy)
    threshold = max(2, -(-len(wanted) // 4))
    ranked: list[tuple[int, int, str]] = []
    seen: set[str] = set()
    position = 0
    for _, _, concept in walk_concepts(ontology):
        for name in (concept.name, *concept.values):
            position += 1
            if name in seen:
                continue
            seen.add(name)
            distance = edit_distance(wanted, normalize(name, policy))
            if distance <= threshold:
                ranked.append((distance, position, name))
    ranked.sort()
    return [name for _, _, name in ranked[:k]]


def check_rulebase(
    rulebase: RuleBase,
    ontology: Ontology,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> LintReport:
    """Resolve every finding of every rule against the ontology.

    UnknownConcept and UnknownProperty are errors. UnknownValue is an error
    for must-equal findings and a warning for must-differ ones (the
    condition stays satisfiable, but the value is probably a typo).
    A concept name appearing in several ontology places is flagged
    AmbiguousConcept at warning level; values are then checked against the
    union of the domains.
    """
    concepts: dict[str, list] = {}
    for _, _, concept in walk_concepts(ontology):
        concepts.setdefault(normalize(concept.name, policy), []).append(concept)

    violations: list[LintViolation] = []
    for model in rulebase.models:
        for rule in model.rules:
            for index, finding in enumerate(rule.findings, start=1):
                hits = concepts.get(normalize(finding.concept, policy))
                if not hits:
                    violations.append(
                        LintViolation(
                            severity=ERROR,
                            code="UnknownConcept",
                            model=model.name,
                            rule=rule.name,
                            finding=index,
                            token=finding.concept,
                            suggestions=tuple(suggest_corrections(finding.concept, ontology, policy)),
                        )
                    )
                    continue
                if len(hits) > 1:
                    violations.append(
                        LintViolation(
                            severity=WARNING,
                            code="AmbiguousConcept",
                            model=model.name,
                            rule=rule.name,
                            finding=index,
                            token=finding.concept,
                        )
                    )
                properties = {normalize(c.property, policy) for c in hits}
                if normalize(finding.property, policy) not in properties:
                    violations.append(
                        LintViolation(
                            severity=ERROR,
                            code="UnknownProperty",
                            model=model.name,
                            rule=rule.name,
                            finding=index,
                            token=finding.property,
                            suggestions=tuple(sorted({c.property for c in hits})),
                        )
                    )
                domain = {normalize(v, policy) for c in hits for v in c.values}
                if normalize(finding.value, policy) not in domain:
                    violations.append(
                        LintViolation(
                            severity=ERROR if finding.polarity == MUST_EQUAL else WARNING,
                            code="UnknownValue",
                            model=model.name,
                            rule=rule.name,
                            finding=index,
                            token=finding.value,
                            suggestions=tuple(suggest_corrections(finding.value, ontology, policy)),
                        )
                    )
    return LintReport(violations=tuple(violations))
