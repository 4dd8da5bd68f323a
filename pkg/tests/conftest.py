"""Shared fixtures: session-scoped solution cache, acceptance reporting."""
import time

import pytest

from laneemden.radial import solve_radial


class SolutionCache:
    """Memoizes radial solves across the whole test session.

    The sweep tests and the acceptance suite request the same handful of
    solutions; solving each once keeps the suite's runtime dominated by
    genuine work.  Wall time per solve is stashed so acceptance can check
    runtime budgets against the actual cost.
    """

    def __init__(self):
        self.store = {}
        self.times = {}

    def get(self, p, k=0, domain=None):
        key = (float(p), int(k), domain)
        if key not in self.store:
            t0 = time.perf_counter()
            self.store[key] = solve_radial(p, k=k, domain=domain)
            self.times[key] = time.perf_counter() - t0
        return self.store[key]


@pytest.fixture(scope="session")
def solutions():
    return SolutionCache()


_CRITERIA = []


@pytest.fixture
def criterion():
    """Recorder for acceptance criteria; prints one line per criterion."""
    def record(num, label, passed, detail=""):
        _CRITERIA.append((num, label, bool(passed), detail))
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok, detail in sorted(_CRITERIA):
        tail = f": {detail}" if detail else ""
        terminalreporter.write_line(
            f"[criterion {num}] {'PASS' if ok else 'FAIL'} - {label}{tail}")
