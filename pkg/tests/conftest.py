import pytest

from cklab.matrix_subshift import validate_matrix

FULL2 = [[1, 1], [1, 1]]
GOLDEN = [[1, 1], [1, 0]]
IDENT2 = [[1, 0], [0, 1]]
FLIP2 = [[0, 1], [1, 0]]
PRIMITIVE3 = [[0, 1, 1], [1, 0, 1], [1, 1, 1]]

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def full2():
    return validate_matrix(FULL2)


@pytest.fixture
def golden():
    return validate_matrix(GOLDEN)


@pytest.fixture
def ident2():
    return validate_matrix(IDENT2)


@pytest.fixture
def flip2():
    return validate_matrix(FLIP2)


@pytest.fixture
def primitive3():
    return validate_matrix(PRIMITIVE3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
