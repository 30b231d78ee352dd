from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from hypothesis import given, settings
from hypothesis import strategies as st

import kbdata
from rcses.model import Concept, Context, Finding, Model, Ontology, Regulation, Rule, RuleBase
from rcses.xmlio import (
    parse_ontology,
    parse_rulebase,
    serialize_ontology,
    serialize_rulebase,
    snapshot,
)


def _resolve(path: str, data: bytes):
    """Follow an issue path inside a well-formed document; None if it breaks."""
    root = ET.fromstring(data)
    segments = path.strip("/").split("/")
    if segments[0] != root.tag:
        return None
    node = root
    for segment in segments[1:]:
        match = re.fullmatch(r"(\w+)\[(\d+)\]", segment)
        if not match:
            return None
        name, index = match.group(1), int(match.group(2))
        same = [child for child in node if child.tag == name]
        if index < 1 or index > len(same):
            return None
        node = same[index - 1]
    return node


# -- ontology parsing ---------------------------------------------------------


def test_parse_ontology_fixture_counts(sample_ontology):
    assert len(sample_ontology.regulations) == 1
    regulation = sample_ontology.regulations[0]
    assert regulation.name == kbdata.APPOINTMENT_REGULATION
    assert [c.name for c in regulation.contexts] == [
        kbdata.CONTEXT_TEMP_JOBS,
        kbdata.CONTEXT_SENIOR_JOBS,
    ]
    concepts = [c for ctx in regulation.contexts for c in ctx.concepts]
    assert [c.name for c in concepts] == [kbdata.AD_CONCEPT, kbdata.DECREE_CONCEPT]
    assert concepts[0].values == kbdata.AD_VALUES
    assert sum(len(c.values) for c in concepts) == 4


def test_parse_ontology_empty_root():
    result = parse_ontology(b"<KSA_Civil_Ontology/>")
    assert result.ok
    assert result.value.regulations == ()


def test_parse_ontology_missing_parent_name(sample_ontology_bytes):
    broken = sample_ontology_bytes.replace(b"ParentName", b"Parent", 1)
    result = parse_ontology(broken)
    assert not result.ok
    missing = [i for i in result.issues if i.code == "AttributeMissing"]
    assert missing and missing[0].path == "/KSA_Civil_Ontology/OntParent[1]"
    assert _resolve(missing[0].path, broken) is not None


def test_parse_ontology_rejects_unknown_element(sample_ontology_bytes):
    broken = sample_ontology_bytes.replace(b"<OntConcept", b"<Concept", 1).replace(
        b"</OntConcept>", b"</Concept>", 1
    )
    result = parse_ontology(broken)
    assert not result.ok
    codes = {i.code for i in result.errors()}
    assert "UnknownElement" in codes


def test_parse_ontology_warns_on_unknown_attribute(sample_ontology_bytes):
    noisy = sample_ontology_bytes.replace(
        '<OntVal ValueName="يوجد إعلان"/>'.encode(),
        '<OntVal ValueName="يوجد إعلان" Weight="3"/>'.encode(),
        1,
    )
    result = parse_ontology(noisy)
    assert result.ok
    assert [i.code for i in result.issues] == ["UnknownAttribute"]
    assert result.issues[0].severity == "warning"
    assert _resolve(result.issues[0].path, noisy) is not None


def test_parse_ontology_empty_domain():
    doc = (
        "<KSA_Civil_Ontology>"
        '<OntParent ParentName="ر"><OntChild ChildName="س">'
        '<OntConcept ConceptName="م"></OntConcept>'
        "</OntChild></OntParent></KSA_Civil_Ontology>"
    ).encode()
    result = parse_ontology(doc)
    assert not result.ok
    issue = result.errors()[0]
    assert issue.code == "EmptyDomain"
    assert issue.path == "/KSA_Civil_Ontology/OntParent[1]/OntChild[1]/OntConcept[1]"
    assert _resolve(issue.path, doc) is not None


def test_parse_ontology_duplicate_names_detected_after_normalization():
    doc = (
        "<KSA_Civil_Ontology>"
        '<OntParent ParentName="الإعلان"/>'
        '<OntParent ParentName="الاعلان"/>'
        "</KSA_Civil_Ontology>"
    ).encode()
    result = parse_ontology(doc)
    assert not result.ok
    issue = result.errors()[0]
    assert issue.code == "DuplicateName"
    assert issue.path == "/KSA_Civil_Ontology/OntParent[2]"


def test_parse_rejects_non_utf8():
    data = "<KSA_Civil_Ontology/>".encode("utf-16")
    result = parse_ontology(data)
    assert not result.ok
    assert result.errors()[0].code == "WellFormedness"


def test_parse_rejects_declared_foreign_encoding():
    data = b'<?xml version="1.0" encoding="windows-1256"?><KSA_Civil_Ontology/>'
    result = parse_ontology(data)
    assert not result.ok
    assert result.errors()[0].code == "WellFormedness"


def test_parse_accepts_utf8_declaration_and_comments():
    data = b'<?xml version="1.0" encoding="UTF-8"?><!-- kb --><KSA_Civil_Ontology/>'
    assert parse_ontology(data).ok


def test_parse_not_xml_at_all():
    result = parse_ontology(b"just text")
    assert not result.ok
    assert result.errors()[0].code == "WellFormedness"


# -- rulebase parsing ---------------------------------------------------------


def test_parse_rulebase_fixture(sample_rulebase):
    assert [m.name for m in sample_rulebase.models] == [kbdata.TERMINATION_MODEL]
    rules = sample_rulebase.models[0].rules
    assert [(r.name, r.consequent, len(r.findings)) for r in rules] == [
        ("R1", kbdata.R1_CONSEQUENT, 1),
        ("R2", kbdata.R2_CONSEQUENT, 1),
    ]
    finding = rules[0].findings[0]
    assert finding.concept == kbdata.R1_CONCEPT
    assert finding.property == "Value"
    assert finding.value == kbdata.R1_VALUE
    assert finding.polarity == "must-equal"


def test_parse_rulebase_tolerates_lowercase_closing_tag(sample_rules_bytes):
    # the raw fixture genuinely closes <Model> with </model>
    assert b"</model>" in sample_rules_bytes
    assert parse_rulebase(sample_rules_bytes).ok


def test_parse_rulebase_resets_persisted_counters(sample_rules_bytes):
    stale = sample_rules_bytes.replace(b'NoTrueFinding="0"', b'NoTrueFinding="7"', 1)
    result = parse_rulebase(stale)
    assert result.ok
    # the model carries no runtime state at all; canonical output is at rest
    assert b'NoTrueFinding="0"' in serialize_rulebase(result.value).data
    assert b'ExistInWM="No"' in serialize_rulebase(result.value).data


def test_parse_rulebase_accepts_plural_counter_spelling(sample_rules_bytes):
    plural = sample_rules_bytes.replace(b"NoTrueFinding=", b"NoTrueFindings=")
    result = parse_rulebase(plural)
    assert result.ok
    assert not result.issues


def test_parse_rulebase_empty_rule(sample_rules_bytes):
    text = sample_rules_bytes.decode()
    start = text.index("<Finding")
    end = text.index("/>", start) + 2
    broken = (text[:start] + text[end:]).encode()
    result = parse_rulebase(broken)
    assert not result.ok
    issue = result.errors()[0]
    assert issue.code == "EmptyRule"
    assert issue.path == "/KSA_Civil_Regulation/Model[1]/Rule[1]"


def test_parse_rulebase_bad_polarity(sample_rules_bytes):
    broken = sample_rules_bytes.replace(b'Equal="Yes"', b'Equal="Maybe"', 1)
    result = parse_rulebase(broken)
    assert not result.ok
    assert result.errors()[0].code == "BadPolarity"


def test_parse_rulebase_duplicate_slot():
    doc = (
        "<KSA_Civil_Regulation>"
        '<Model ModelName="م">'
        '<Rule Name="R1" RegItem="ن">'
        '<Finding Cpt="أ" Prop="Value" Val="1" Equal="Yes"/>'
        '<Finding Cpt="أ" Prop="Value" Val="2" Equal="No"/>'
        "</Rule></Model></KSA_Civil_Regulation>"
    ).encode()
    result = parse_rulebase(doc)
    assert not result.ok
    issue = result.errors()[0]
    assert issue.code == "DuplicateSlot"
    assert issue.path == "/KSA_Civil_Regulation/Model[1]/Rule[1]/Finding[2]"
    assert _resolve(issue.path, doc) is not None


def test_parse_rulebase_missing_equal_is_attribute_missing():
    doc = (
        "<KSA_Civil_Regulation>"
        '<Model ModelName="م">'
        '<Rule Name="R1" RegItem="ن">'
        '<Finding Cpt="أ" Prop="Value" Val="1"/>'
        "</Rule></Model></KSA_Civil_Regulation>"
    ).encode()
    result = parse_rulebase(doc)
    assert not result.ok
    assert result.errors()[0].code == "AttributeMissing"


# -- canonical serialization --------------------------------------------------


def test_serialize_ontology_fixed_point(sample_ontology_bytes):
    first = serialize_ontology(parse_ontology(sample_ontology_bytes).value)
    second = serialize_ontology(parse_ontology(first.data).value)
    assert first.data == second.data
    assert first.kind == "ontology"


def test_serialize_rulebase_fixed_point(sample_rules_bytes):
    first = serialize_rulebase(parse_rulebase(sample_rules_bytes).value)
    second = serialize_rulebase(parse_rulebase(first.data).value)
    assert first.data == second.data
    assert b"</Model>" in first.data
    assert b'NoTrueFinding="0"' in first.data
    assert b'ExistInWM="No"' in first.data


def test_serialize_empty_documents():
    assert serialize_ontology(Ontology()).data == b"<KSA_Civil_Ontology/>\n"
    assert serialize_rulebase(RuleBase()).data == b"<KSA_Civil_Regulation/>\n"


def test_serialize_escapes_markup_and_round_trips():
    ontology = Ontology(
        regulations=(
            Regulation(
                name="ر",
                contexts=(
                    Context(
                        name="س",
                        concepts=(Concept(name="م", values=('a<&">b',)),),
                    ),
                ),
            ),
        )
    )
    data = serialize_ontology(ontology).data
    assert b"&lt;" in data and b"&amp;" in data and b"&quot;" in data
    assert b'a<&">b' not in data
    reparsed = parse_ontology(data)
    assert reparsed.ok
    assert reparsed.value == ontology


def test_serialize_then_parse_is_identity(sample_rulebase):
    reparsed = parse_rulebase(serialize_rulebase(sample_rulebase).data)
    assert reparsed.ok
    assert reparsed.value == sample_rulebase


# -- randomized round trips ---------------------------------------------------

_name = st.text(alphabet="بتجحدرزسشصطعفقكلمنهوي", min_size=1, max_size=6)
_names = lambda n: st.lists(_name, min_size=1, max_size=n, unique=True)  # noqa: E731


@st.composite
def _ontologies(draw):
    regulations = []
    for reg_name in draw(_names(3)):
        contexts = []
        for ctx_name in draw(_names(2)):
            concepts = []
            for concept_name in draw(_names(3)):
                values = tuple(draw(_names(3)))
                concepts.append(Concept(name=concept_name, values=values))
            contexts.append(Context(name=ctx_name, concepts=tuple(concepts)))
        regulations.append(Regulation(name=reg_name, contexts=tuple(contexts)))
    return Ontology(regulations=tuple(regulations))


@st.composite
def _rulebases(draw):
    models = []
    for model_name in draw(_names(2)):
        rules = []
        for index, rule_name in enumerate(draw(_names(3))):
            concepts = draw(_names(3))
            findings = tuple(
                Finding(
                    concept=concept,
                    property="Value",
                    value=draw(_name),
                    polarity=draw(st.sampled_from(["must-equal", "must-differ"])),
                )
                for concept in concepts
            )
            rules.append(Rule(name=f"{rule_name}{index}", consequent=draw(_name), findings=findings))
        models.append(Model(name=model_name, rules=tuple(rules)))
    return RuleBase(models=tuple(models))


@settings(max_examples=60)
@given(_ontologies())
def test_ontology_round_trip_property(ontology):
    document = serialize_ontology(ontology)
    result = parse_ontology(document.data)
    assert result.ok, result.issues
    assert result.value == ontology
    assert serialize_ontology(result.value).data == document.data


@settings(max_examples=60)
@given(_rulebases())
def test_rulebase_round_trip_property(rulebase):
    document = serialize_rulebase(rulebase)
    result = parse_rulebase(document.data)
    assert result.ok, result.issues
    assert result.value == rulebase
    assert serialize_rulebase(result.value).data == document.data


def test_snapshot_fingerprint_tracks_content(sample_ontology, sample_rulebase):
    a = snapshot(sample_ontology, sample_rulebase, version=1)
    b = snapshot(sample_ontology, sample_rulebase, version=2)
    assert a.fingerprint == b.fingerprint
    slim = snapshot(Ontology(), sample_rulebase, version=3)
    assert slim.fingerprint != a.fingerprint
