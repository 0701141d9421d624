import pytest

from nibs_kg.ingest import generate_synthetic_corpus, ingest_corpus
from nibs_kg.store import Store
from nibs_kg.template import define_rtms_template
from nibs_kg.vocabulary import seed_rtms_vocabulary

NS = "http://kg.test"


@pytest.fixture
def store():
    return Store(NS)


@pytest.fixture
def seeded():
    store = Store(NS)
    manifest = seed_rtms_vocabulary(store)
    template = define_rtms_template(store, manifest)
    return store, manifest, template


@pytest.fixture(scope="session")
def _corpus_600():
    store = Store(NS)
    manifest = seed_rtms_vocabulary(store)
    template = define_rtms_template(store, manifest)
    summary = ingest_corpus(store, manifest, template, generate_synthetic_corpus(1, 600))
    return store, manifest, template, summary


@pytest.fixture
def corpus_600(_corpus_600):
    """Read-only: shared across the session, do not mutate."""
    return _corpus_600


@pytest.fixture
def small_corpus():
    store = Store(NS)
    manifest = seed_rtms_vocabulary(store)
    template = define_rtms_template(store, manifest)
    summary = ingest_corpus(store, manifest, template, generate_synthetic_corpus(7, 40))
    return store, manifest, template, summary


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
