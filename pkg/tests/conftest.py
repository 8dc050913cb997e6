"""Shared fixtures; collects one verdict line per acceptance criterion."""

import pytest

_VERDICTS = {}


@pytest.fixture
def record():
    """Call ``record(tag, passed, detail)`` before asserting on a criterion."""

    def _record(tag, passed, detail=""):
        _VERDICTS[tag] = (bool(passed), detail)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_VERDICTS, key=lambda t: int(t.split("-")[1])):
        passed, detail = _VERDICTS[tag]
        terminalreporter.write_line(f"{tag}: {'PASS' if passed else 'FAIL'}  {detail}")
