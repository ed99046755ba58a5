from __future__ import annotations

from pathlib import Path

import pytest

from sortweaver.minilang import extract_facts, parse
from sortweaver.model import SourceModel, load_records

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"

CORPUS_FILES = sorted(p.name for p in CORPUS.glob("*.mini"))


def model_from_source(text: str, source: str = "inline.mini") -> SourceModel:
    result = parse(text, source)
    assert result.ok, [str(d) for d in result.diagnostics]
    extraction = extract_facts(result.unit)
    return load_records(extraction.records)


def corpus_model(name: str) -> SourceModel:
    return model_from_source((CORPUS / f"{name}.mini").read_text(), f"{name}.mini")


@pytest.fixture(scope="session")
def command_model() -> SourceModel:
    return corpus_model("command")


@pytest.fixture(scope="session")
def decorator_model() -> SourceModel:
    return corpus_model("decorator")


@pytest.fixture(scope="session")
def exceptions_model() -> SourceModel:
    return corpus_model("exceptions")


@pytest.fixture(scope="session")
def monitor_model() -> SourceModel:
    return corpus_model("monitor")


@pytest.fixture(scope="session")
def undo_model() -> SourceModel:
    return corpus_model("undo")
