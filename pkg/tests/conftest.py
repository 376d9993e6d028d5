import numpy as np
import pytest

from cylab.lattice import Geometry


@pytest.fixture
def cyl3():
    return Geometry.cylinder(2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def log(number: int, title: str, passed: bool, detail: str, tag: str | None = None) -> None:
        verdict = tag or ("PASS" if passed else "FAIL")
        line = f"{verdict:<9s} criterion {number:>2d}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
