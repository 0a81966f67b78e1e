from __future__ import annotations

import contextlib

import pytest

_RESULTS: dict[int, tuple[str, str, str]] = {}


class _Record:
    detail = ""


@pytest.fixture
def criterion():
    """``with criterion(n, title) as r:`` records PASS/FAIL for the summary table."""

    @contextlib.contextmanager
    def _ctx(number: int, title: str):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _RESULTS[number] = ("FAIL", title, f"{rec.detail} {msg}".strip())
            raise
        _RESULTS[number] = ("PASS", title, rec.detail)

    return _ctx


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  [{detail}]")
