from pathlib import Path

import pytest

from llmlogic import kernels

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(params=kernels.available_backends())
def backend(request) -> str:
    return request.param


@pytest.fixture
def worked_prog():
    from llmlogic.clauses import load_json_program

    return load_json_program((FIXTURES / "prog.json").read_text())


@pytest.fixture
def tailgate():
    from llmlogic.clauses import parse_program

    return parse_program((FIXTURES / "tailgate.pro").read_text())


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
