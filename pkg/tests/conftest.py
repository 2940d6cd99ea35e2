from pathlib import Path

import pytest

from fmw.dsl import load

CORPUS = Path(__file__).resolve().parent.parent / "corpus" / "examples.fmw"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def ws():
    return load(CORPUS)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
