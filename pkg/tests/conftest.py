import pytest

from refltrace.reflection import make_reflection_data
from refltrace.rmodel import rational_gl_model, six_vertex_model


@pytest.fixture(scope="session")
def rational():
    return rational_gl_model(2, 1.0)


@pytest.fixture(scope="session")
def six_vertex():
    return six_vertex_model()


@pytest.fixture(scope="session", params=["rational", "six-vertex"])
def model(request, rational, six_vertex):
    return rational if request.param == "rational" else six_vertex


@pytest.fixture(scope="session")
def data(model):
    return make_reflection_data(model, sites=1)


VERDICTS: dict[int, str] = {}


def record(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    VERDICTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
