"""Shared pytest hooks: acceptance criteria report one line each."""

import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Context manager recording PASS/FAIL, elapsed time and an optional limit."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            if ok and limit is not None and elapsed > limit:
                ok = False
                title += f" (over {limit:g} s limit)"
            line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  [{elapsed:.2f} s]"
            results.append(line)
            print(line)
        if not ok:
            pytest.fail(f"criterion {number} exceeded its {limit:g} s runtime limit")

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results):
            terminalreporter.write_line(line)
