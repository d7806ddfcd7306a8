import pytest

from dlfd.tiling import TilingProblem


@pytest.fixture
def one_tile():
    return TilingProblem(("t",), {("t", "t")}, {("t", "t")})


@pytest.fixture
def swap():
    """Two tiles alternating horizontally, constant vertically."""
    return TilingProblem(("a", "b"), {("a", "b"), ("b", "a")}, {("a", "a"), ("b", "b")})


@pytest.fixture
def h_empty():
    return TilingProblem(("t",), set(), {("t", "t")})


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
