import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from iparc.morphology import default_se_library  # noqa: E402


@pytest.fixture(scope="session")
def lib():
    return default_se_library()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance criterion report ------------------------------------------------------

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome; printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
