import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (passed, detail); filled by the acceptance tests
_ACCEPTANCE = {}


class AcceptanceRecorder:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, label, ok):
        self.checks.append((label, bool(ok)))
        return ok

    def finish(self, error=None):
        ok = error is None and all(c[1] for c in self.checks)
        parts = [f"{'ok' if good else 'FAILED'} {label}" for label, good in self.checks]
        if error is not None:
            parts.append(f"error {type(error).__name__}: {error}")
        _ACCEPTANCE[self.number] = (ok, self.title, "; ".join(parts))
        return ok


@pytest.fixture
def criterion(request):
    """Yield a recorder for the criterion named by the test's ``criterion`` marker."""
    marker = request.node.get_closest_marker("criterion")
    rec = AcceptanceRecorder(*marker.args)
    yield rec
    if rec.number not in _ACCEPTANCE:
        rec.finish(RuntimeError("test ended before recording a verdict"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, title, detail = _ACCEPTANCE[number]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
