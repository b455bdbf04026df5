import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dworkcoh.cli import load_source  # noqa: E402
from dworkcoh.frobenius_gm import frobenius_matrix  # noqa: E402

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def fermat3():
    return load_source("fermat3").poly


@pytest.fixture(scope="session")
def quartic3():
    return load_source("quartic3").poly


@pytest.fixture(scope="session")
def quintic4():
    return load_source("quintic4").poly


@pytest.fixture(scope="session")
def family():
    return load_source("local-p2")


@pytest.fixture(scope="session")
def fermat_frob(fermat3):
    return frobenius_matrix(fermat3, 5, 6)


@pytest.fixture(scope="session")
def family_frob_teich2(family):
    return frobenius_matrix(family.poly, 7, 6, lam_k=2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
