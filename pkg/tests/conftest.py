from __future__ import annotations

import shutil

import pytest

from iotiqa.casefile import fixture_path, load_fixture

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _CRITERIA.append((marker.args[0], status, marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    merged: dict[str, tuple[str, str, int]] = {}
    for cid, status, title in _CRITERIA:
        prev_status, prev_title, checks = merged.get(cid, ("PASS", title, 0))
        merged[cid] = ("FAIL" if "FAIL" in (prev_status, status) else "PASS", prev_title, checks + 1)
    terminalreporter.section("acceptance criteria")
    for cid in sorted(merged, key=lambda c: int(c.removeprefix("AC"))):
        status, title, checks = merged[cid]
        terminalreporter.write_line(f"{status}  {cid:<5} {title} ({checks} check(s))")


@pytest.fixture
def cs2():
    return load_fixture("case_study_2")


@pytest.fixture
def cs2_path(tmp_path):
    """Writable copy of the shipped case-study fixture."""
    target = tmp_path / "case_study_2.json"
    shutil.copyfile(fixture_path("case_study_2"), target)
    return target
