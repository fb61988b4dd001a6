import sys
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def _record(config, line: str) -> None:
    lines = getattr(config, "_acceptance_lines", None)
    if lines is None:
        lines = []
        config._acceptance_lines = lines
    lines.append(line)


@pytest.fixture
def criterion(request):
    """Wrap one acceptance criterion; emits a PASS/FAIL line either way."""

    @contextmanager
    def run(number: int, name: str):
        try:
            yield
        except Exception:
            _record(request.config, f"ACCEPTANCE {number} ({name}): FAIL")
            raise
        _record(request.config, f"ACCEPTANCE {number} ({name}): PASS")

    return run


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
