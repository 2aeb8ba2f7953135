import contextlib

import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


class _Criterion:
    def __init__(self, number):
        self.number = number

    def check(self, passed: bool, detail: str) -> bool:
        _CRITERIA[self.number] = (bool(passed), detail)
        print(_line(self.number, bool(passed), detail))
        return bool(passed)


def _line(number, passed, detail):
    return f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"


@pytest.fixture
def criterion():
    """``with criterion(k) as c: ... assert c.check(ok, detail)``; errors are recorded as FAIL."""

    @contextlib.contextmanager
    def open_(number):
        c = _Criterion(number)
        try:
            yield c
        except Exception as exc:
            if number not in _CRITERIA:
                c.check(False, f"error: {type(exc).__name__}: {exc}")
            raise

    return open_


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_line(k, *_CRITERIA[k]))
