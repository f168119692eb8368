import numpy as np
import pytest

from ridge_equality import validate_design
from ridge_equality.generators import X_REF


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def x_ref():
    return validate_design(X_REF)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
