import pytest

from healthlit.corpus import filter_snippets, ingest, make_silver, sample_documents_path
from healthlit.thesaurus import load_sample_lexicon

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line; the lines are echoed in the terminal summary."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        request.config.stash[_ACCEPTANCE].append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lexicon():
    return load_sample_lexicon()


@pytest.fixture(scope="session")
def snippets(lexicon):
    return list(filter_snippets(ingest(sample_documents_path()), lexicon))


@pytest.fixture(scope="session")
def silver(snippets, lexicon):
    return make_silver(snippets, lexicon, 7)
