"""Consultation sessions: working memory, rule matching and explanations.

A session pins one knowledge-base snapshot and one model. Asserting or
retracting a finding updates two incremental structures — a per-finding
satisfied mirror and a per-rule satisfied-count — which are, by
construction, always equal to a from-scratch recomputation over the working
memory (tests enforce this).

Rule status semantics:

* sure      — every finding satisfied
* excluded  — some finding's slot is answered but the finding fails
* expected  — no failing finding, at least one slot unanswered

A must-differ finding is only satisfied by an answered, different value;
an unanswered slot never satisfies anything.
"""
from __future__ import annotations

import html
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .errors import NotAnswered, UnknownModel, UnknownRule, UnknownSlot, UnknownValue
from .model import MUST_EQUAL, KbSnapshot, Model, Rule, Slot
from .textnorm import DEFAULT_POLICY, NormalizationPolicy, normalize

ASSERT = "assert"
REPLACE = "replace"
RETRACT = "retract"


class RuleStatus(str, Enum):
    SURE = "sure"
    EXPECTED = "expected"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class LogEntry:
    slot: Slot
    value: str | None
    action: str


@dataclass
class WorkingMemory:
    """User-asserted slot values, normalized, single value per slot."""

    entries: dict[Slot, str] = field(default_factory=dict)
    log: list[LogEntry] = field(default_factory=list)


@dataclass(frozen=True)
class SureEntry:
    rule: str
    consequent: str


@dataclass(frozen=True)
class ExpectedEntry:
    rule: str
    consequent: str
    unanswered: tuple[Slot, ...]


@dataclass(frozen=True)
class ExcludedEntry:
    rule: str
    violated: tuple[Slot, ...]


@dataclass(frozen=True)
class EvaluationResult:
    """Partition of the model's rules, document order within each list."""

    sure: tuple[SureEntry, ...]
    expected: tuple[ExpectedEntry, ...]
    excluded: tuple[ExcludedEntry, ...]
    kb_version: int

    def as_dict(self) -> dict:
        return {
            "sure": [{"rule": e.rule, "consequent": e.consequent} for e in self.sure],
            "expected": [
                {
                    "rule": e.rule,
                    "consequent": e.consequent,
                    "unanswered": [_slot_dict(s) for s in e.unanswered],
                }
                for e in self.expected
            ],
            "excluded": [
                {"rule": e.rule, "violated": [_slot_dict(s) for s in e.violated]}
                for e in self.excluded
            ],
            "kb_version": self.kb_version,
        }


def _slot_dict(slot: Slot) -> dict:
    return {"concept": slot[0], "property": slot[1]}


@dataclass(frozen=True)
class TraceRow:
    slot: Slot
    polarity: str
    required: str
    observed: str | None  # None while unanswered
    satisfied: bool


@dataclass(frozen=True)
class Trace:
    rule: str
    consequent: str
    rows: tuple[TraceRow, ...]
    status: RuleStatus


@dataclass(frozen=True)
class Question:
    """A slot worth asking next, with its ontology value domain (may be
    empty when the ontology does not know the concept)."""

    concept: str
    property: str
    values: tuple[str, ...]

    def as_dict(self) -> dict:
        return {"concept": self.concept, "property": self.property, "values": list(self.values)}


@dataclass(frozen=True)
class _FindingRef:
    rule_index: int
    finding_index: int
    slot: Slot  # normalized
    value: str  # normalized
    must_equal: bool


class Session:
    """Single consultation against one model of one pinned snapshot.

    Mutations must not be interleaved by concurrent writers; reads
    (evaluate/explain/next_questions) are side-effect free.
    """

    def __init__(
        self,
        kb: KbSnapshot,
        model: Model,
        session_id: str | None = None,
        policy: NormalizationPolicy = DEFAULT_POLICY,
    ):
        self.id = session_id or uuid.uuid4().hex
        self.kb = kb
        self.model = model
        self.policy = policy
        self.wm = WorkingMemory()
        self.created = self.last_active = time.time()
        self._refs: list[_FindingRef] = []
        self._by_slot: dict[Slot, list[_FindingRef]] = {}
        for ri, rule in enumerate(model.rules):
            for fi, finding in enumerate(rule.findings):
                ref = _FindingRef(
                    rule_index=ri,
                    finding_index=fi,
                    slot=(normalize(finding.concept, policy), normalize(finding.property, policy)),
                    value=normalize(finding.value, policy),
                    must_equal=finding.polarity == MUST_EQUAL,
                )
                self._refs.append(ref)
                self._by_slot.setdefault(ref.slot, []).append(ref)
        self._ref_at: dict[tuple[int, int], _FindingRef] = {
            (ref.rule_index, ref.finding_index): ref for ref in self._refs
        }
        self.mirrors: dict[tuple[int, int], bool] = {
            (ref.rule_index, ref.finding_index): False for ref in self._refs
        }
        self.counters: list[int] = [0] * len(model.rules)

    @property
    def kb_version(self) -> int:
        return self.kb.version

    # -- working-memory updates -------------------------------------------

    def _satisfied(self, ref: _FindingRef) -> bool:
        observed = self.wm.entries.get(ref.slot)
        if observed is None:
            return False
        return (observed == ref.value) if ref.must_equal else (observed != ref.value)

    def _refresh_slot(self, slot: Slot):
        for ref in self._by_slot.get(slot, ()):
            key = (ref.rule_index, ref.finding_index)
            now = self._satisfied(ref)
            if now != self.mirrors[key]:
                self.mirrors[key] = now
                self.counters[ref.rule_index] += 1 if now else -1

    def assert_finding(self, concept: str, property: str, value: str) -> "Session":
        """Answer (or re-answer) a slot; replace semantics on re-assertion."""
        slot = (normalize(concept, self.policy), normalize(property, self.policy))
        domain = self.kb.domain(concept, property)
        if slot not in self._by_slot and domain is None:
            raise UnknownSlot(
                f"({concept}, {property}) is not used by model {self.model.name!r} "
                "and is not in the ontology",
                concept=concept,
                property=property,
            )
        normalized_value = normalize(value, self.policy)
        if domain is not None:
            allowed = {normalize(v, self.policy) for v in domain}
            if normalized_value not in allowed:
                raise UnknownValue(
                    f"{value!r} is outside the domain of ({concept}, {property})",
                    concept=concept,
                    property=property,
                    value=value,
                )
        action = REPLACE if slot in self.wm.entries else ASSERT
        self.wm.entries[slot] = normalized_value
        self.wm.log.append(LogEntry(slot=slot, value=normalized_value, action=action))
        self._refresh_slot(slot)
        self.last_active = time.time()
        return self

    def retract_finding(self, concept: str, property: str) -> "Session":
        slot = (normalize(concept, self.policy), normalize(property, self.policy))
        if slot not in self.wm.entries:
            raise NotAnswered(
                f"({concept}, {property}) has no asserted value", concept=concept, property=property
            )
        removed = self.wm.entries.pop(slot)
        self.wm.log.append(LogEntry(slot=slot, value=removed, action=RETRACT))
        self._refresh_slot(slot)
        self.last_active = time.time()
        return self

    # -- read-only views -----------------------------------------------------

    def _rule_status(self, rule_index: int, rule: Rule) -> tuple[RuleStatus, list[Slot], list[Slot]]:
        """Status plus (unanswered slots, violated slots) in finding order."""
        if self.counters[rule_index] == len(rule.findings):
            return RuleStatus.SURE, [], []
        unanswered: list[Slot] = []
        violated: list[Slot] = []
        for fi, finding in enumerate(rule.findings):
            if self.mirrors[(rule_index, fi)]:
                continue
            if self._ref_at[(rule_index, fi)].slot in self.wm.entries:
                violated.append(finding.slot)
            else:
                unanswered.append(finding.slot)
        if violated:
            return RuleStatus.EXCLUDED, unanswered, violated
        return RuleStatus.EXPECTED, unanswered, violated

    def evaluate(self) -> EvaluationResult:
        sure: list[SureEntry] = []
        expected: list[ExpectedEntry] = []
        excluded: list[ExcludedEntry] = []
        for ri, rule in enumerate(self.model.rules):
            status, unanswered, violated = self._rule_status(ri, rule)
            if status is RuleStatus.SURE:
                sure.append(SureEntry(rule=rule.name, consequent=rule.consequent))
            elif status is RuleStatus.EXCLUDED:
                excluded.append(ExcludedEntry(rule=rule.name, violated=tuple(violated)))
            else:
                expected.append(
                    ExpectedEntry(
                        rule=rule.name, consequent=rule.consequent, unanswered=tuple(unanswered)
                    )
                )
        return EvaluationResult(
            sure=tuple(sure),
            expected=tuple(expected),
            excluded=tuple(excluded),
            kb_version=self.kb.version,
        )

    def next_questions(self, k: int) -> list[Question]:
        """Unanswered slots of still-possible rules, most-shared first."""
        if k < 1:
            raise ValueError("k must be >= 1")
        scores: dict[Slot, int] = {}
        first_seen: dict[Slot, int] = {}
        display: dict[Slot, Slot] = {}
        order = 0
        for ri, rule in enumerate(self.model.rules):
            status, _, _ = self._rule_status(ri, rule)
            if status is not RuleStatus.EXPECTED:
                continue
            counted: set[Slot] = set()
            for fi, finding in enumerate(rule.findings):
                if self.mirrors[(ri, fi)]:
                    continue
                slot = self._ref_at[(ri, fi)].slot  # expected => unsatisfied = unanswered
                if slot in counted:
                    continue
                counted.add(slot)
                scores[slot] = scores.get(slot, 0) + 1
                if slot not in first_seen:
                    first_seen[slot] = order
                    display[slot] = finding.slot
                order += 1
        ranked = sorted(scores, key=lambda slot: (-scores[slot], first_seen[slot]))
        questions: list[Question] = []
        for slot in ranked[:k]:
            concept, prop = display[slot]
            domain = self.kb.domain(concept, prop)
            questions.append(
                Question(concept=concept, property=prop, values=tuple(domain or ()))
            )
        return questions

    def explain(self, rule_name: str) -> Trace:
        wanted = normalize(rule_name, self.policy)
        for ri, rule in enumerate(self.model.rules):
            if normalize(rule.name, self.policy) != wanted:
                continue
            rows = []
            for fi, finding in enumerate(rule.findings):
                ref = self._ref_at[(ri, fi)]
                observed = self.wm.entries.get(ref.slot)
                satisfied = observed is not None and (
                    (observed == ref.value) if ref.must_equal else (observed != ref.value)
                )
                rows.append(
                    TraceRow(
                        slot=finding.slot,
                        polarity=finding.polarity,
                        required=finding.value,
                        observed=observed,
                        satisfied=satisfied,
                    )
                )
            status, _, _ = self._rule_status(ri, rule)
            return Trace(rule=rule.name, consequent=rule.consequent, rows=tuple(rows), status=status)
        raise UnknownRule(f"model {self.model.name!r} has no rule {rule_name!r}", rule=rule_name)

    def recomputed_state(self) -> tuple[dict[tuple[int, int], bool], list[int]]:
        """Mirrors and counters rebuilt from scratch over the current WM;
        must always equal the incrementally maintained ones."""
        mirrors = {
            (ref.rule_index, ref.finding_index): self._satisfied(ref) for ref in self._refs
        }
        counters = [0] * len(self.model.rules)
        for (ri, _), satisfied in mirrors.items():
            if satisfied:
                counters[ri] += 1
        return mirrors, counters


def new_session(
    kb: KbSnapshot,
    model_name: str,
    session_id: str | None = None,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> Session:
    model = kb.model(model_name)
    if model is None:
        raise UnknownModel(f"no model named {model_name!r}", model=model_name)
    return Session(kb=kb, model=model, session_id=session_id, policy=policy)


_STATUS_LABEL = {
    RuleStatus.SURE: "sure",
    RuleStatus.EXPECTED: "expected",
    RuleStatus.EXCLUDED: "excluded",
}


def render_trace_html(trace: Trace) -> str:
    """Deterministic, fully escaped HTML fragment for one rule's trace."""
    esc = html.escape
    status = _STATUS_LABEL[trace.status]
    out = [
        f'<section class="trace trace-{status}" dir="rtl">',
        f"<h3>{esc(trace.consequent)}</h3>",
        "<table>",
        "<thead><tr><th>concept</th><th>property</th><th>required</th>"
        "<th>observed</th><th>satisfied</th></tr></thead>",
        "<tbody>",
    ]
    for row in trace.rows:
        mark = "✓" if row.satisfied else "✗"
        relation = "=" if row.polarity == MUST_EQUAL else "≠"
        if row.observed is None:
            observed = '<td class="observed unanswered">unanswered</td>'
        else:
            observed = f'<td class="observed">{esc(row.observed)}</td>'
        out.append(
            "<tr>"
            f"<td>{esc(row.slot[0])}</td>"
            f"<td>{esc(row.slot[1])}</td>"
            f'<td class="required">{relation} {esc(row.required)}</td>'
            f"{observed}"
            f'<td class="satisfied">{mark}</td>'
            "</tr>"
        )
    out.extend(
        [
            "</tbody>",
            "</table>",
            f'<p class="status status-{status}">{esc(trace.rule)}: {status}</p>',
            "</section>",
        ]
    )
    return "\n".join(out)
