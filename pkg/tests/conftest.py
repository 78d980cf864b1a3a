import numpy as np
import pytest

from ig_ident.streams import substream


@pytest.fixture
def rng(request):
    """Independent Philox stream per test, keyed by the test name."""
    return substream(20240, request.node.name, 0)


def make_stream(tag: str, index: int = 0) -> np.random.Generator:
    return substream(20240, tag, index)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
