import os
from pathlib import Path

import pytest

from docdrift.extraction import FilterConfig, ScanDiagnostics, SourceLanguage, scan_corpus

FIXTURES = Path(__file__).parent / "fixtures"

# Snapshot endpoint configuration before the autouse fixture strips it, so the
# opt-in live smoke test can still reach a real endpoint.
LIVE_ENV = {
    name: os.environ.get(name)
    for name in (
        "DOCDRIFT_LIVE_SMOKE",
        "DOCDRIFT_API_BASE",
        "DOCDRIFT_API_KEY",
        "DOCDRIFT_MODEL",
        "OPENAI_BASE_URL",
        "OPENAI_API_KEY",
    )
}


@pytest.fixture(scope="session")
def corpus_root() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def minicorpus_root() -> Path:
    return FIXTURES / "minicorpus"


@pytest.fixture()
def mini_pairs(minicorpus_root):
    """The five documented functions of the mini corpus, unfiltered."""
    return scan_corpus(
        minicorpus_root,
        SourceLanguage.PYTHON,
        FilterConfig(min_tokens=0, dedupe=False),
        project="minicorpus",
        diagnostics=ScanDiagnostics(),
    )


@pytest.fixture(autouse=True)
def _clean_docdrift_env(monkeypatch):
    """Keep ambient endpoint and option configuration out of every test."""
    for name in ("OPENAI_BASE_URL", "OPENAI_API_KEY"):
        monkeypatch.delenv(name, raising=False)
    for name in list(os.environ):
        if name.startswith("DOCDRIFT_"):
            monkeypatch.delenv(name, raising=False)
