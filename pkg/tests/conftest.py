from __future__ import annotations

from pathlib import Path

import pytest

from rcses.builder import ONTOLOGY_FILE, RULES_FILE
from rcses.xmlio import parse_ontology, parse_rulebase, snapshot

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLE_KB = FIXTURES / "sample_kb"
CONSISTENT_KB = FIXTURES / "consistent_kb"


@pytest.fixture(scope="session")
def sample_kb_dir() -> Path:
    return SAMPLE_KB


@pytest.fixture(scope="session")
def consistent_kb_dir() -> Path:
    return CONSISTENT_KB


@pytest.fixture(scope="session")
def sample_ontology_bytes() -> bytes:
    return (SAMPLE_KB / ONTOLOGY_FILE).read_bytes()


@pytest.fixture(scope="session")
def sample_rules_bytes() -> bytes:
    return (SAMPLE_KB / RULES_FILE).read_bytes()


@pytest.fixture(scope="session")
def sample_ontology(sample_ontology_bytes):
    result = parse_ontology(sample_ontology_bytes)
    assert result.ok, result.issues
    return result.value


@pytest.fixture(scope="session")
def sample_rulebase(sample_rules_bytes):
    result = parse_rulebase(sample_rules_bytes)
    assert result.ok, result.issues
    return result.value


@pytest.fixture(scope="session")
def sample_snapshot(sample_ontology, sample_rulebase):
    return snapshot(sample_ontology, sample_rulebase, version=1)


@pytest.fixture(scope="session")
def consistent_ontology():
    result = parse_ontology((CONSISTENT_KB / ONTOLOGY_FILE).read_bytes())
    assert result.ok, result.issues
    return result.value


@pytest.fixture(scope="session")
def consistent_snapshot(consistent_ontology, sample_rulebase):
    return snapshot(consistent_ontology, sample_rulebase, version=1)
