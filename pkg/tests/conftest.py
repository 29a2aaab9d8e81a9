import mpmath
import pytest

_LINES = []


@pytest.fixture(autouse=True)
def _mp_precision():
    # mpmath oracles run at 40 digits regardless of test order.
    with mpmath.workdps(40):
        yield


@pytest.fixture
def verdict(capsys):
    """Record and print one acceptance line: ``verdict(label, ok, detail)``."""

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else "")
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
