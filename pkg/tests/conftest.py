import pytest

from renyi_exhaust import density, spectral


@pytest.fixture(scope="session")
def cert20():
    return spectral.certify(20)


@pytest.fixture(scope="session")
def cert64():
    return spectral.certify(64)


@pytest.fixture(scope="session")
def fixed_point():
    return density.iterate_to_fixed(density.constant(0.5), 1e-12, m=64)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Store a one-line verdict for the acceptance summary."""

    def _record(criterion: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append((criterion, ok, detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
