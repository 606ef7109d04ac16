"""Shared fixtures plus a PASS/FAIL summary line per acceptance criterion."""

from __future__ import annotations

import re
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "descbound" / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def batchnorm_path() -> Path:
    return DATA_DIR / "batchnorm.rvw"


@pytest.fixture(scope="session")
def resnet_path() -> Path:
    return DATA_DIR / "resnet152.rvw"


@pytest.fixture(scope="session")
def densenet_path() -> Path:
    return DATA_DIR / "densenet264.rvw"


# --- acceptance criteria summary -------------------------------------------
#
# Tests named test_criterion_<n>_* report one PASS/FAIL line each in the
# terminal summary, so the acceptance gate reads as a checklist.

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")
_outcomes: dict[int, str] = {}
_titles: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    report = out.get_result()
    m = _CRITERION_RE.search(item.name)
    if not m:
        return
    num = int(m.group(1))
    doc = (item.function.__doc__ or "").strip()
    _titles[num] = doc.splitlines()[0] if doc else item.name
    if report.when == "call":
        _outcomes[num] = "PASS" if report.passed else "FAIL"
    elif report.failed:  # setup/teardown error
        _outcomes[num] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        terminalreporter.write_line(
            f"CRITERION {num} ({_titles[num]}): {_outcomes[num]}")
