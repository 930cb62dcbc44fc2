from __future__ import annotations

import pytest

from timing_agent.corpus_gen import GenSpec, generate
from timing_agent.model import CornerMode


@pytest.fixture(scope="session")
def seed7():
    """Default generated corpus (6 corner/modes, 200 paths per path report)."""
    return generate(GenSpec(seed=7))


@pytest.fixture(scope="session")
def corpus(seed7):
    return seed7[0]


@pytest.fixture(scope="session")
def truth(seed7):
    return seed7[1]


@pytest.fixture(scope="session")
def tt_read(corpus):
    return corpus.db(CornerMode("TT", "read"))


@pytest.fixture(scope="session")
def small():
    """A small single corner/mode corpus for fast tests."""
    return generate(GenSpec(seed=3, corners=("TT",), modes=("read",), paths_per_report=40))


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; the lines are echoed in the summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def check(name: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
