import pytest
from hypothesis import settings

from hesse_mahler.mpnum import PrecisionContext

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def prec():
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def prec128():
    return PrecisionContext(128)


# criterion -> list of (ok, message), filled by the acceptance suite
ACCEPTANCE: dict = {}


def record(criterion: str, ok: bool, message: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), message))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        results = ACCEPTANCE[criterion]
        ok = all(r for r, _ in results)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}")
        for r, msg in results:
            if not r:
                terminalreporter.write_line(f"        {msg}")
