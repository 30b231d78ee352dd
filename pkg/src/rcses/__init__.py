"""Expert-system shell for XML regulation knowledge bases.

Load an ontology plus a rulebase, run question-and-answer consultation
sessions that partition rules into sure / expected / excluded, and serve
the whole thing over HTTP. See README.md for the tour.
"""

from .engine import EvaluationResult, RuleStatus, Session, new_session, render_trace_html
from .model import (
    Concept,
    Context,
    Finding,
    KbSnapshot,
    Model,
    Ontology,
    Regulation,
    Rule,
    RuleBase,
    list_models,
    lookup_concept,
    rule_arity,
    value_domain,
)
from .lexicon import LintReport, check_rulebase, suggest_corrections
from .textnorm import DEFAULT_POLICY, NormalizationPolicy, normalize
from .xmlio import (
    CanonicalDocument,
    ParseIssue,
    ParseResult,
    parse_ontology,
    parse_rulebase,
    serialize_ontology,
    serialize_rulebase,
    snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalDocument",
    "Concept",
    "Context",
    "DEFAULT_POLICY",
    "EvaluationResult",
    "Finding",
    "KbSnapshot",
    "LintReport",
    "Model",
    "NormalizationPolicy",
    "Ontology",
    "ParseIssue",
    "ParseResult",
    "Regulation",
    "Rule",
    "RuleBase",
    "RuleStatus",
    "Session",
    "check_rulebase",
    "list_models",
    "lookup_concept",
    "new_session",
    "normalize",
    "parse_ontology",
    "parse_rulebase",
    "render_trace_html",
    "rule_arity",
    "serialize_ontology",
    "serialize_rulebase",
    "snapshot",
    "suggest_corrections",
    "value_domain",
    "__version__",
]
